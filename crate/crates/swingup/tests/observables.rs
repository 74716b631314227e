use swingup::collective::DressedState;
use swingup::dynamics::{build_model, evolve, simulate, uniform_grid, EvolveOptions};
use swingup::observables::{bloch_vector, emission_spectrum, g2_function, photon_number, qrt_correlator, QrtMode, SpectrumConfig};
use swingup::presets::{self, KAPPA_OVER_G, T_END};
use swingup::qalgebra::DensityMatrix;
use swingup::reproduce::table_cell;
use swingup::Error;

#[test]
fn bloch_z_is_population_difference() {
    let cfg = presets::plus_target(0.01);
    let model = build_model(&cfg).unwrap();
    let rho0 = DensityMatrix::ground(model.space().clone());
    let traj = evolve(&model, &rho0, cfg.start_time(), &uniform_grid(-0.01, T_END, 30), &EvolveOptions::default()).unwrap();
    for rho in &traj.states {
        let pops = model.populations(rho);
        let rho_e = model.bare_emitter_state(rho);
        for s in [DressedState::Plus, DressedState::Minus, DressedState::X] {
            let v = bloch_vector(&rho_e, s, &model.dressed);
            assert_eq!(v.components[2], pops.get(s) - pops.g);
        }
    }
}

#[test]
fn antiphase_drive_keeps_bright_state_empty() {
    let cfg = presets::minus_target(0.01);
    let model = build_model(&cfg).unwrap();
    let rho0 = DensityMatrix::ground(model.space().clone());
    let traj = evolve(&model, &rho0, cfg.start_time(), &uniform_grid(cfg.start_time(), 0.1, 400), &EvolveOptions::default()).unwrap();
    let max_plus = traj.states.iter().map(|r| model.populations(r).plus).fold(0.0, f64::max);
    assert!(max_plus < 0.01, "{max_plus}");
}

#[test]
fn collective_targets_are_antibunched() {
    for target in [DressedState::Plus, DressedState::Minus] {
        for k in KAPPA_OVER_G {
            let (g2, _) = table_cell(target, k).unwrap();
            assert!(g2 < 1.0, "{target:?} k={k}: {g2}");
        }
    }
}

#[test]
fn correlator_at_zero_delay_is_photon_number() {
    let cfg = presets::resonant_cavity_run(DressedState::Plus, 1.0).unwrap();
    let opts = EvolveOptions::default();
    let run = simulate(&cfg, cfg.start_time(), &[0.05], &opts).unwrap();
    let model = &run.model;
    let a = model.a.as_ref().unwrap().matrix().clone();
    let n = photon_number(model, &run.trajectory).unwrap()[0];
    let c = qrt_correlator(model, run.trajectory.last(), 0.05, &a.adjoint(), &a, &[0.0, 0.01], QrtMode::PostPulse, &opts.integrator).unwrap();
    assert!((c[0].re - n).abs() < 1e-14 && c[0].im.abs() < 1e-14);
    assert!(c[1].norm() < c[0].norm());
}

#[test]
fn post_pulse_mode_rejects_a_live_drive() {
    let cfg = presets::resonant_cavity_run(DressedState::Plus, 1.0).unwrap();
    let model = build_model(&cfg).unwrap();
    let rho = DensityMatrix::ground(model.space().clone());
    let err = g2_function(&model, &rho, T_END, &[0.0], QrtMode::PostPulse, &EvolveOptions::default().integrator).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

#[test]
fn g2_masks_vanishing_denominators() {
    let cfg = presets::resonant_cavity_run(DressedState::Plus, 1.0).unwrap();
    let model = build_model(&cfg).unwrap();
    let rho = DensityMatrix::ground(model.space().clone());
    let r = g2_function(&model, &rho, -0.05, &[0.0, 0.001], QrtMode::TimeDependent, &EvolveOptions::default().integrator).unwrap();
    assert!(r.masked.iter().all(|m| *m));
    assert!(r.values.iter().all(|v| v.is_nan()));
}

#[test]
fn spectrum_is_non_negative_before_clipping() {
    let cfg = presets::resonant_cavity_run(DressedState::Plus, 0.2).unwrap();
    let model = build_model(&cfg).unwrap();
    let sc = SpectrumConfig { n_outer: 256, n_omega: 801, ..SpectrumConfig::default() };
    let s = emission_spectrum(&model, cfg.start_time(), &sc, &EvolveOptions::default().integrator).unwrap();
    assert!(s.min_before_clip > -1e-6, "{}", s.min_before_clip);
    assert_eq!(s.values.iter().cloned().fold(0.0, f64::max), 1.0);
}

#[test]
fn spectrum_requires_a_cavity() {
    let cfg = presets::plus_target(0.01);
    let model = build_model(&cfg).unwrap();
    let r = emission_spectrum(&model, cfg.start_time(), &SpectrumConfig::default(), &EvolveOptions::default().integrator);
    assert!(matches!(r, Err(Error::Precondition(_))));
}
