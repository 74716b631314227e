use std::f64::consts::PI;

use proptest::prelude::*;
use swingup::collective::{
    collective_decay, collective_shift, dipole_hamiltonian, dressed_basis, dressed_transform, perpendicular_decay,
    perpendicular_shift, Geometry,
};
use swingup::drive::{drive_terms, envelope, Pulse, SuperPulseConfig};
use swingup::qalgebra::{embed, max_abs, partial_trace, CMatrix, DensityMatrix, HilbertSpace, C64};

fn cmat2() -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)
        .prop_map(|v| CMatrix::from_iterator(2, 2, v.into_iter().map(|(re, im)| C64::new(re, im))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embedding_is_multiplicative(a in cmat2(), b in cmat2(), slot in 0usize..2, with_cavity in any::<bool>()) {
        let space = if with_cavity { HilbertSpace::with_cavity(2).unwrap() } else { HilbertSpace::emitters() };
        let lhs = embed(&(&a * &b), slot, &space).unwrap();
        let rhs = embed(&a, slot, &space).unwrap().mul(&embed(&b, slot, &space).unwrap()).unwrap();
        prop_assert!(max_abs(&(lhs.matrix() - rhs.matrix())) < 1e-14);
    }

    #[test]
    fn product_states_trace_to_one(p in 0.0f64..1.0, q in 0.0f64..1.0, n in 0usize..3) {
        let space = HilbertSpace::with_cavity(2).unwrap();
        let local = |x: f64| CMatrix::from_row_slice(2, 2, &[C64::new(x, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0 - x, 0.0)]);
        let mut fock = CMatrix::zeros(3, 3);
        fock[(n, n)] = C64::new(1.0, 0.0);
        let rho = local(p).kronecker(&local(q)).kronecker(&fock);
        let rho = DensityMatrix::from_matrix(space.clone(), rho).unwrap();
        let kept = partial_trace(rho.matrix(), &space, &[]);
        prop_assert!((kept[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn general_coupling_matches_perpendicular_form(d in 0.005f64..2.0) {
        let geom = Geometry::perpendicular(d);
        let (s, p) = (collective_shift(&geom).unwrap(), perpendicular_shift(d, 1.0).unwrap());
        let (g, q) = (collective_decay(&geom).unwrap(), perpendicular_decay(d, 1.0).unwrap());
        prop_assert!((s - p).abs() <= 1e-13 * p.abs().max(1.0));
        prop_assert!((g - q).abs() <= 1e-13);
    }

    #[test]
    fn transform_round_trip(d in 0.005f64..2.0, delta1 in -2e4f64..0.0) {
        let geom = Geometry::perpendicular(d);
        let h = dipole_hamiltonian(collective_shift(&geom).unwrap(), delta1);
        let u = dressed_transform();
        let back = &u * (u.adjoint() * &h * &u) * u.adjoint();
        prop_assert!(max_abs(&(back - &h)) <= 1e-12 * max_abs(&h).max(1.0));
        prop_assert!(max_abs(&(u.adjoint() * &u - CMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn branch_rates_sum_to_twice_gamma(d in 0.001f64..50.0, theta in 0.0f64..PI, gamma in 0.1f64..3.0) {
        let b = dressed_basis(&Geometry { d_over_lambda: d, theta, gamma }, -7595.58).unwrap();
        prop_assert!((b.gamma_plus() + b.gamma_minus() - 2.0 * gamma).abs() <= 4.0 * f64::EPSILON * gamma);
    }

    #[test]
    fn envelopes_are_even_about_their_centres(s in 0.0f64..0.03, tau in -0.01f64..0.01) {
        let cfg = SuperPulseConfig { tau, ..SuperPulseConfig::with_areas_pi(20.0, 40.0) };
        for which in [Pulse::First, Pulse::Second] {
            let c = cfg.centre(which);
            let (a, b) = (envelope(&cfg, which, c + s), envelope(&cfg, which, c - s));
            prop_assert!((a - b).abs() <= 1e-12 * a.max(b).max(1e-300));
        }
    }

    #[test]
    fn second_color_modulus_ignores_relative_phase(t in -0.03f64..0.03, phi in -PI..PI) {
        let a = SuperPulseConfig::with_areas_pi(50.0, 50.0);
        let b = SuperPulseConfig { phi_x: phi, ..a };
        let (x, y) = (drive_terms(&a, t).1.norm(), drive_terms(&b, t).1.norm());
        prop_assert!((x - y).abs() <= 4.0 * f64::EPSILON * x.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn cross_damping_never_exceeds_single_emitter_rate(d in 1e-3f64..20.0) {
        prop_assert!(collective_decay(&Geometry::perpendicular(d)).unwrap().abs() <= 1.0);
    }
}

#[test]
fn second_color_phase_winds_at_the_beat_frequency() {
    let cfg = SuperPulseConfig::with_areas_pi(50.0, 50.0);
    let h = cfg.beat_period() / 64.0;
    let mut prev = drive_terms(&cfg, -0.01).1.arg();
    let mut unwrapped = 0.0;
    for k in 1..=640 {
        let cur = drive_terms(&cfg, -0.01 + h * k as f64).1.arg();
        let mut step = cur - prev;
        if step < -PI {
            step += 2.0 * PI;
        }
        assert!(step > 0.0);
        unwrapped += step;
        prev = cur;
    }
    let rate = unwrapped / (640.0 * h);
    assert!((rate - (cfg.delta1 - cfg.delta2)).abs() < 1e-6 * rate);
}
