//! Dipole-dipole couplings and the dressed (collective) basis of the emitter pair.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qalgebra::{CMatrix, C64, ONE, ZERO};

/// Smallest separation accepted; the near-field terms lose precision below it.
pub const MIN_D_OVER_LAMBDA: f64 = 1e-3;

/// Emitter-pair geometry. Rates and shifts come out in the units of `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    /// Separation in units of the transition wavelength.
    pub d_over_lambda: f64,
    /// Angle between the dipoles and the separation axis.
    pub theta: f64,
    /// Single-emitter decay rate.
    pub gamma: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry { d_over_lambda: 0.01, theta: PI / 2.0, gamma: 1.0 }
    }
}

impl Geometry {
    pub fn perpendicular(d_over_lambda: f64) -> Self {
        Geometry { d_over_lambda, ..Geometry::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        self.collect_errors("geom", &mut errs);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    pub(crate) fn collect_errors(&self, prefix: &str, errs: &mut Vec<String>) {
        if !(self.d_over_lambda.is_finite() && self.d_over_lambda >= MIN_D_OVER_LAMBDA) {
            errs.push(format!(
                "{prefix}.d_over_lambda must be finite and >= {MIN_D_OVER_LAMBDA} (got {})",
                self.d_over_lambda
            ));
        }
        if !(0.0..=PI).contains(&self.theta) {
            errs.push(format!("{prefix}.theta must lie in [0, pi] (got {})", self.theta));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            errs.push(format!("{prefix}.gamma must be positive (got {})", self.gamma));
        }
    }

    fn x(&self) -> f64 {
        2.0 * PI * self.d_over_lambda
    }
}

/// Coherent exchange shift Ω₁₂ for arbitrary dipole angle.
pub fn collective_shift(geom: &Geometry) -> Result<f64> {
    geom.validate()?;
    let x = geom.x();
    let c2 = geom.theta.cos().powi(2);
    let (s, c) = x.sin_cos();
    Ok(-0.75 * geom.gamma * ((1.0 - c2) * c / x - (1.0 - 3.0 * c2) * (s / (x * x) + c / (x * x * x))))
}

/// Cross-damping rate Γ₁₂ for arbitrary dipole angle.
pub fn collective_decay(geom: &Geometry) -> Result<f64> {
    geom.validate()?;
    let x = geom.x();
    let c2 = geom.theta.cos().powi(2);
    let (s, c) = x.sin_cos();
    Ok(1.5 * geom.gamma * ((1.0 - c2) * s / x + (1.0 - 3.0 * c2) * (c / (x * x) - s / (x * x * x))))
}

/// Ω₁₂ for dipoles perpendicular to the separation; agrees with [`collective_shift`] at θ = π/2.
pub fn perpendicular_shift(d_over_lambda: f64, gamma: f64) -> Result<f64> {
    Geometry { d_over_lambda, theta: PI / 2.0, gamma }.validate()?;
    let x = 2.0 * PI * d_over_lambda;
    let (s, c) = x.sin_cos();
    Ok(0.75 * gamma * (-c / x + s / (x * x) + c / (x * x * x)))
}

/// Γ₁₂ for dipoles perpendicular to the separation.
pub fn perpendicular_decay(d_over_lambda: f64, gamma: f64) -> Result<f64> {
    Geometry { d_over_lambda, theta: PI / 2.0, gamma }.validate()?;
    let x = 2.0 * PI * d_over_lambda;
    let (s, c) = x.sin_cos();
    Ok(1.5 * gamma * (s / x + c / (x * x) - s / (x * x * x)))
}

/// Index of each dressed state in the (X, +, −, G) ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DressedState {
    X,
    Plus,
    Minus,
    G,
}

impl DressedState {
    pub const ALL: [DressedState; 4] = [DressedState::X, DressedState::Plus, DressedState::Minus, DressedState::G];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            DressedState::X => "X",
            DressedState::Plus => "plus",
            DressedState::Minus => "minus",
            DressedState::G => "G",
        }
    }
}

/// Rotating-frame energies of the dressed states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressedEnergies {
    pub x: f64,
    pub plus: f64,
    pub minus: f64,
    pub g: f64,
}

/// Dressed basis of the emitter pair.
#[derive(Clone, Debug, PartialEq)]
pub struct DressedBasis {
    /// Columns are |X⟩, |+⟩, |−⟩, |G⟩ expanded in the bare basis.
    pub transform: CMatrix,
    pub energies: DressedEnergies,
    pub shift: f64,
    pub gamma: f64,
    pub gamma12: f64,
}

impl DressedBasis {
    pub fn gamma_plus(&self) -> f64 {
        self.gamma + self.gamma12
    }

    pub fn gamma_minus(&self) -> f64 {
        self.gamma - self.gamma12
    }

    /// Bare-basis column of one dressed state.
    pub fn ket(&self, s: DressedState) -> [C64; 4] {
        let c = self.transform.column(s.index());
        [c[0], c[1], c[2], c[3]]
    }

    /// `⟨s|ρ|s⟩` for a 4x4 bare-basis emitter state.
    pub fn population(&self, rho_e: &CMatrix, s: DressedState) -> f64 {
        self.element(rho_e, s, s).re
    }

    /// `⟨a|ρ|b⟩` for a 4x4 bare-basis emitter state.
    pub fn element(&self, rho_e: &CMatrix, a: DressedState, b: DressedState) -> C64 {
        let va = self.transform.column(a.index());
        let vb = self.transform.column(b.index());
        (va.adjoint() * rho_e * vb)[(0, 0)]
    }
}

/// The fixed bare-to-dressed unitary.
pub fn dressed_transform() -> CMatrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(4, 4, &[
        ONE,  ZERO, ZERO, ZERO,
        ZERO, h,    -h,   ZERO,
        ZERO, h,    h,    ZERO,
        ZERO, ZERO, ZERO, ONE,
    ]);
    m
}

pub fn dressed_basis(geom: &Geometry, delta1: f64) -> Result<DressedBasis> {
    let shift = collective_shift(geom)?;
    let gamma12 = collective_decay(geom)?;
    Ok(DressedBasis {
        transform: dressed_transform(),
        energies: energies_from(shift, delta1),
        shift,
        gamma: geom.gamma,
        gamma12,
    })
}

pub fn energies_from(shift: f64, delta1: f64) -> DressedEnergies {
    DressedEnergies { x: -2.0 * delta1, plus: -delta1 + shift, minus: -delta1 - shift, g: 0.0 }
}

/// Bare-basis emitter Hamiltonian in the frame rotating at the first laser frequency.
pub fn dipole_hamiltonian(shift: f64, delta1: f64) -> CMatrix {
    let d = C64::new(-delta1, 0.0);
    let o = C64::new(shift, 0.0);
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(4, 4, &[
        d * 2.0, ZERO, ZERO, ZERO,
        ZERO,    d,    o,    ZERO,
        ZERO,    o,    d,    ZERO,
        ZERO,    ZERO, ZERO, ZERO,
    ]);
    m
}

/// Off-diagonal drive entries of the dressed Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureWeights {
    pub x_plus: C64,
    pub x_minus: C64,
    pub plus_g: C64,
    pub minus_g: C64,
}

pub fn mixture_weights(theta_phase: f64, envelope: C64) -> MixtureWeights {
    let e = C64::from_polar(1.0, theta_phase);
    let h = -envelope * 0.5;
    MixtureWeights { x_plus: h * (e + 1.0), x_minus: h * (e - 1.0), plus_g: h * (e + 1.0), minus_g: h * (-e + 1.0) }
}

/// Upper-triangular drive matrix `Σ h_ij |i⟩⟨j|` in the dressed basis for a given envelope value.
pub fn mixture_matrix(theta_phase: f64, envelope: C64) -> CMatrix {
    let w = mixture_weights(theta_phase, envelope);
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 1)] = w.x_plus;
    m[(0, 2)] = w.x_minus;
    m[(1, 3)] = w.plus_g;
    m[(2, 3)] = w.minus_g;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalgebra::max_abs;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    // Reference values from tests/oracles/couplings_mp.py (50-digit arithmetic).
    const SHIFT_ORACLE: [(f64, f64); 6] = [
        (0.01, 3017.6307077464339962),
        (0.05, 23.082541374161999401),
        (0.1, 2.597093873725706128),
        (0.25, 0.30396355092701331433),
        (0.5, 0.21454376381294338677),
        (1.0, -0.11634262596580904972),
    ];
    const DECAY_ORACLE: [(f64, f64); 6] = [
        (0.01, 0.99921059861864947623),
        (0.05, 0.98036490410154343041),
        (0.1, 0.92269684838227584618),
        (0.25, 0.5679112453529781444),
        (0.5, -0.15198177546350665717),
        (1.0, 0.037995443865876664291),
    ];

    #[test]
    fn shift_matches_extended_precision() {
        for (d, want) in SHIFT_ORACLE {
            let got = collective_shift(&Geometry::perpendicular(d)).unwrap();
            assert!(close(got, want, 1e-12), "d={d}: {got} vs {want}");
        }
        let near = collective_shift(&Geometry::perpendicular(0.01)).unwrap();
        assert!((near - 3017.6).abs() < 0.1);
    }

    #[test]
    fn decay_matches_extended_precision() {
        for (d, want) in DECAY_ORACLE {
            let got = collective_decay(&Geometry::perpendicular(d)).unwrap();
            assert!((got - want).abs() < 1e-12, "d={d}: {got} vs {want}");
        }
    }

    #[test]
    fn far_field_vanishes() {
        let g = Geometry::perpendicular(1e3);
        assert!(collective_shift(&g).unwrap().abs() < 1e-3);
        assert!(collective_decay(&g).unwrap().abs() < 1e-3);
    }

    #[test]
    fn near_field_decay_tends_to_gamma() {
        let mut prev = 0.0;
        for d in [0.05, 0.02, 0.01, 0.005, 0.002, 0.001] {
            let g12 = collective_decay(&Geometry::perpendicular(d)).unwrap();
            let dev = (1.0 - g12).abs();
            assert!(d == 0.05 || dev < prev, "deviation must shrink as d -> 0");
            prev = dev;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(collective_shift(&Geometry::perpendicular(0.0)).is_err());
        assert!(collective_shift(&Geometry::perpendicular(-0.1)).is_err());
        assert!(collective_decay(&Geometry { theta: 4.0, ..Geometry::default() }).is_err());
    }

    #[test]
    fn dressed_energies_at_close_spacing() {
        let b = dressed_basis(&Geometry::perpendicular(0.01), -7595.58).unwrap();
        assert!((b.energies.plus - 10613.210707746433996).abs() < 1e-8);
        assert!((b.energies.minus - 4577.9492922535660038).abs() < 1e-8);
        assert!((b.energies.plus - b.energies.minus - 2.0 * b.shift).abs() <= 4.0 * f64::EPSILON * 7595.58);
        assert!((b.gamma_plus() + b.gamma_minus() - 2.0 * b.gamma).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn degenerate_manifold_without_shift() {
        let e = energies_from(0.0, -7595.58);
        assert_eq!(e.plus, e.minus);
        assert_eq!(e.plus, 7595.58);
    }

    #[test]
    fn transform_diagonalises_dipole_hamiltonian() {
        let b = dressed_basis(&Geometry::perpendicular(0.01), -7595.58).unwrap();
        let h = dipole_hamiltonian(b.shift, -7595.58);
        let d = b.transform.adjoint() * &h * &b.transform;
        let e = b.energies;
        let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            [e.x, e.plus, e.minus, e.g].iter().map(|&v| C64::new(v, 0.0)).collect(),
        ));
        assert!(max_abs(&(d - want)) < 1e-10);
        // Independent oracle: numerical eigenvalues of the bare matrix.
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        let mut want = vec![e.x, e.plus, e.minus, e.g];
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mixture_weights_at_tabulated_phases() {
        let om = C64::new(2.5, -0.7);
        let w = mixture_weights(0.0, om);
        assert!((w.x_plus + om).norm() < 1e-15 && (w.plus_g + om).norm() < 1e-15);
        assert!(w.x_minus.norm() < 1e-15 && w.minus_g.norm() < 1e-15);

        let w = mixture_weights(PI, om);
        assert!(w.x_plus.norm() < 1e-15 && w.plus_g.norm() < 1e-15);
        assert!((w.x_minus - om).norm() < 1e-15);
        assert!((w.minus_g + om).norm() < 1e-15);

        let w = mixture_weights(PI / 2.0, om);
        for h in [w.x_plus, w.x_minus, w.plus_g, w.minus_g] {
            assert!((h.norm() - om.norm() / 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn mixture_matrix_is_bare_drive_in_dressed_frame() {
        use crate::qalgebra::sigma_plus;
        let id = CMatrix::identity(2, 2);
        let s1 = sigma_plus().kronecker(&id);
        let s2 = id.kronecker(&sigma_plus());
        let u = dressed_transform();
        for theta in [-2.0, 0.0, 0.4, PI / 2.0, PI] {
            let f = C64::new(0.3, 0.8);
            let sp = &s1 * C64::from_polar(1.0, theta) + &s2;
            let bare = u.adjoint() * (&sp * (-f)) * &u;
            let dressed = mixture_matrix(theta, f * 2f64.sqrt());
            assert!(max_abs(&(bare - dressed)) < 1e-14);
        }
    }
}
