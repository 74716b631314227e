//! Named parameter sets for the three preparation targets.

use std::f64::consts::PI;

use crate::collective::{collective_shift, DressedState, Geometry};
use crate::drive::SuperPulseConfig;
use crate::dynamics::{CavityConfig, SystemConfig};
use crate::error::{Error, Result};

/// Cavity coupling used throughout, in units of Γ.
pub const G: f64 = 100.0;
/// Cavity loss rates as multiples of [`G`].
pub const KAPPA_OVER_G: [f64; 3] = [0.2, 1.0, 5.0];
/// End of the pulse pair for readout.
pub const T_END: f64 = 0.02;

/// |+⟩ from the ground state: areas (68.25π, 59.05π), simultaneous, in phase.
pub fn plus_target(d_over_lambda: f64) -> SystemConfig {
    SystemConfig {
        geom: Geometry::perpendicular(d_over_lambda),
        pulse: SuperPulseConfig::with_areas_pi(68.25, 59.05),
        ..SystemConfig::default()
    }
}

/// |−⟩ from the ground state: areas (20π, 40π), delay 0.004, antiphase.
pub fn minus_target(d_over_lambda: f64) -> SystemConfig {
    SystemConfig {
        geom: Geometry::perpendicular(d_over_lambda),
        pulse: SuperPulseConfig { tau: 0.004, theta: PI, ..SuperPulseConfig::with_areas_pi(20.0, 40.0) },
        ..SystemConfig::default()
    }
}

/// |X⟩ = |e,e⟩ from the ground state: areas (51.74π, 70.48π).
pub fn x_target(d_over_lambda: f64) -> SystemConfig {
    SystemConfig {
        geom: Geometry::perpendicular(d_over_lambda),
        pulse: SuperPulseConfig::with_areas_pi(51.74, 70.48),
        ..SystemConfig::default()
    }
}

pub fn target_config(target: DressedState, d_over_lambda: f64) -> Result<SystemConfig> {
    match target {
        DressedState::Plus => Ok(plus_target(d_over_lambda)),
        DressedState::Minus => Ok(minus_target(d_over_lambda)),
        DressedState::X => Ok(x_target(d_over_lambda)),
        DressedState::G => Err(Error::Precondition("the ground state needs no preparation".into())),
    }
}

/// Cavity detuning entering `−Δc a†a` that puts the mode on the target's emission line.
pub fn resonant_delta_c(cfg: &SystemConfig, target: DressedState) -> Result<f64> {
    let om = collective_shift(&cfg.geom)?;
    let d1 = cfg.pulse.delta1;
    match target {
        DressedState::Plus => Ok(d1 - om),
        DressedState::Minus => Ok(d1 + om),
        DressedState::X | DressedState::G => Ok(d1),
    }
}

/// Coupling phases `(φ₁, φ₂)` that address the branch of each target.
pub fn branch_phases(target: DressedState) -> (f64, f64) {
    match target {
        DressedState::Minus => (0.0, PI),
        DressedState::X => (0.0, PI / 2.0),
        DressedState::Plus | DressedState::G => (0.0, 0.0),
    }
}

/// Adds a cavity with loss `kappa_over_g · G`.
pub fn with_cavity(cfg: &SystemConfig, kappa_over_g: f64, delta_c: f64, phases: (f64, f64)) -> SystemConfig {
    SystemConfig {
        cavity: Some(CavityConfig { g: G, kappa: kappa_over_g * G, delta_c, phi1: phases.0, phi2: phases.1, ..CavityConfig::default() }),
        ..*cfg
    }
}

/// Target run with a cavity resonant to its emission line and matching phases.
/// |+⟩ and |−⟩ use d = 0.01λ, |X⟩ uses d = 0.1λ.
pub fn resonant_cavity_run(target: DressedState, kappa_over_g: f64) -> Result<SystemConfig> {
    let d = if target == DressedState::X { 0.1 } else { 0.01 };
    let base = target_config(target, d)?;
    Ok(with_cavity(&base, kappa_over_g, resonant_delta_c(&base, target)?, branch_phases(target)))
}
