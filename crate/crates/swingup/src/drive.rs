//! Two-color Gaussian pulse pair and its rotating-frame drive coefficients.
//!
//! Pulse `i` has envelope `Ω_i(t) = α_i / √(2π σ_i²) · exp(−(t − t_i)² / (2σ_i²))`
//! with `t_1 = 0` and `t_2 = τ` under [`EnvelopeShape::Conventional`], and
//! `exp(−(t − t_i)² / (2σ_i)²)` under [`EnvelopeShape::DoubledWidth`].
//! Times are in units of 1/Γ and frequencies in units of Γ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qalgebra::C64;

/// Envelopes are exactly zero beyond this many standard deviations from their centre.
pub const SUPPORT_WIDTHS: f64 = 6.0;

/// Unit conversion anchored at Γ = 1 ns⁻¹.
pub mod units {
    /// Scaled frequency units per meV.
    pub const GAMMA_PER_MEV: f64 = 1519.116;
    /// Scaled time units per ps.
    pub const INV_GAMMA_PER_PS: f64 = 1e-3;

    pub fn mev_to_scaled(mev: f64) -> f64 {
        mev * GAMMA_PER_MEV
    }

    pub fn scaled_to_mev(x: f64) -> f64 {
        x / GAMMA_PER_MEV
    }

    pub fn ps_to_scaled(ps: f64) -> f64 {
        ps * INV_GAMMA_PER_PS
    }

    pub fn scaled_to_ps(t: f64) -> f64 {
        t / INV_GAMMA_PER_PS
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeShape {
    /// `exp(−t²/(2σ²))`: standard deviation σ, area α.
    #[default]
    Conventional,
    /// `exp(−t²/(2σ)²)`: standard deviation √2·σ, area √2·α.
    DoubledWidth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pulse {
    First,
    Second,
}

/// Parameters of the pulse pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuperPulseConfig {
    pub delta1: f64,
    pub delta2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// Pulse area in radians.
    pub alpha1: f64,
    pub alpha2: f64,
    /// Centre of the second pulse.
    pub tau: f64,
    pub phi_x: f64,
    /// Optical phase on emitter 1; emitter 2 is the reference.
    pub theta: f64,
    pub shape: EnvelopeShape,
}

impl Default for SuperPulseConfig {
    fn default() -> Self {
        SuperPulseConfig {
            delta1: -7595.58,
            delta2: -15191.16,
            sigma1: 0.006,
            sigma2: 0.006,
            alpha1: 0.0,
            alpha2: 0.0,
            tau: 0.0,
            phi_x: 0.0,
            theta: 0.0,
            shape: EnvelopeShape::Conventional,
        }
    }
}

impl SuperPulseConfig {
    /// Default detunings and widths with areas given in multiples of π.
    pub fn with_areas_pi(alpha1_pi: f64, alpha2_pi: f64) -> Self {
        SuperPulseConfig { alpha1: alpha1_pi * PI, alpha2: alpha2_pi * PI, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        self.collect_errors("pulse", &mut errs);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    pub(crate) fn collect_errors(&self, prefix: &str, errs: &mut Vec<String>) {
        for (name, v) in [("delta1", self.delta1), ("delta2", self.delta2), ("tau", self.tau), ("phi_x", self.phi_x)] {
            if !v.is_finite() {
                errs.push(format!("{prefix}.{name} must be finite (got {v})"));
            }
        }
        for (name, v) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("{prefix}.{name} must be positive (got {v})"));
            }
        }
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(v.is_finite() && v >= 0.0) {
                errs.push(format!("{prefix}.{name} must be non-negative (got {v})"));
            }
        }
        if !(self.theta > -PI && self.theta <= PI) {
            errs.push(format!("{prefix}.theta must lie in (-pi, pi] (got {})", self.theta));
        }
    }

    fn params(&self, which: Pulse) -> (f64, f64, f64) {
        match which {
            Pulse::First => (self.alpha1, self.sigma1, 0.0),
            Pulse::Second => (self.alpha2, self.sigma2, self.tau),
        }
    }

    /// Standard deviation of the envelope.
    pub fn std_dev(&self, which: Pulse) -> f64 {
        let (_, sigma, _) = self.params(which);
        match self.shape {
            EnvelopeShape::Conventional => sigma,
            EnvelopeShape::DoubledWidth => sigma * 2f64.sqrt(),
        }
    }

    pub fn centre(&self, which: Pulse) -> f64 {
        self.params(which).2
    }

    pub fn peak(&self, which: Pulse) -> f64 {
        let (alpha, sigma, _) = self.params(which);
        alpha / ((2.0 * PI).sqrt() * sigma)
    }

    /// Closed-form time integral of the envelope.
    pub fn area(&self, which: Pulse) -> f64 {
        let (alpha, _, _) = self.params(which);
        match self.shape {
            EnvelopeShape::Conventional => alpha,
            EnvelopeShape::DoubledWidth => alpha * 2f64.sqrt(),
        }
    }

    /// Interval outside which the envelope is exactly zero.
    pub fn support(&self, which: Pulse) -> (f64, f64) {
        let c = self.centre(which);
        let w = SUPPORT_WIDTHS * self.std_dev(which);
        (c - w, c + w)
    }

    /// Union of both supports; the drive vanishes outside it.
    pub fn window(&self) -> (f64, f64) {
        let (a0, a1) = self.support(Pulse::First);
        let (b0, b1) = self.support(Pulse::Second);
        (a0.min(b0), a1.max(b1))
    }

    /// Period of the beat between the two colors.
    pub fn beat_period(&self) -> f64 {
        2.0 * PI / (self.delta1 - self.delta2).abs()
    }

    /// Largest step that resolves both the envelopes and the beat.
    pub fn max_step_in_window(&self) -> f64 {
        let s = self.sigma1.min(self.sigma2) / 50.0;
        let dd = (self.delta1 - self.delta2).abs();
        if dd > 0.0 {
            s.min(2.0 * PI / (20.0 * dd))
        } else {
            s
        }
    }

    pub fn is_off(&self) -> bool {
        self.alpha1 == 0.0 && self.alpha2 == 0.0
    }
}

/// Real envelope of one pulse at time `t`.
pub fn envelope(cfg: &SuperPulseConfig, which: Pulse, t: f64) -> f64 {
    let (alpha, sigma, centre) = cfg.params(which);
    let s = t - centre;
    if alpha == 0.0 || s.abs() > SUPPORT_WIDTHS * cfg.std_dev(which) {
        return 0.0;
    }
    let denom = match cfg.shape {
        EnvelopeShape::Conventional => 2.0 * sigma * sigma,
        EnvelopeShape::DoubledWidth => 4.0 * sigma * sigma,
    };
    cfg.peak(which) * (-s * s / denom).exp()
}

/// Coefficients `(f₁, f₂)` multiplying the collective raising operator.
pub fn drive_terms(cfg: &SuperPulseConfig, t: f64) -> (C64, C64) {
    let f1 = C64::new(envelope(cfg, Pulse::First, t) / 2.0, 0.0);
    let e2 = envelope(cfg, Pulse::Second, t);
    let f2 = if e2 == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        C64::from_polar(e2 / 2.0, (cfg.delta1 - cfg.delta2) * t + cfg.phi_x)
    };
    (f1, f2)
}

/// `f₁ + f₂`.
pub fn total_drive(cfg: &SuperPulseConfig, t: f64) -> C64 {
    let (a, b) = drive_terms(cfg, t);
    a + b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_pulse() -> SuperPulseConfig {
        SuperPulseConfig::with_areas_pi(68.25, 59.05)
    }

    #[test]
    fn unit_peak_normalisation() {
        let cfg = SuperPulseConfig { alpha1: (2.0 * PI).sqrt() * 0.006, ..SuperPulseConfig::default() };
        assert!((envelope(&cfg, Pulse::First, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn peak_for_superradiant_areas() {
        let p = envelope(&table_pulse(), Pulse::First, 0.0);
        // 68.25π / (√(2π)·0.006), evaluated in 50-digit arithmetic.
        assert!((p - 14256.448311963815357).abs() < 1e-9);
    }

    #[test]
    fn five_sigma_tail() {
        let cfg = table_pulse();
        let p = cfg.peak(Pulse::First);
        for t in [-5.0 * 0.006, 5.0 * 0.006] {
            assert!(envelope(&cfg, Pulse::First, t) / p < 4e-6);
        }
    }

    #[test]
    fn zero_outside_support() {
        let cfg = SuperPulseConfig { tau: 0.004, ..table_pulse() };
        for t in [-1.0, -0.0361, 0.0401, 0.5] {
            let (a, b) = drive_terms(&cfg, t);
            assert!(a.norm() < 1e-12 && b.norm() < 1e-12);
        }
        let (w0, w1) = cfg.window();
        assert!((w0 + 0.036).abs() < 1e-15 && (w1 - 0.040).abs() < 1e-15);
    }

    #[test]
    fn second_pulse_modulus_ignores_phase() {
        let a = table_pulse();
        let b = SuperPulseConfig { phi_x: PI, ..a };
        for k in 0..50 {
            let t = -0.03 + k as f64 * 1.3e-3;
            let (x, y) = (drive_terms(&a, t).1.norm(), drive_terms(&b, t).1.norm());
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * x);
        }
    }

    #[test]
    fn beat_period_of_default_colors() {
        assert!((table_pulse().beat_period() - 0.00082721600025009103675).abs() < 1e-15);
    }

    #[test]
    fn beat_phase_winds_at_detuning_difference() {
        let cfg = table_pulse();
        let dt = 1e-6;
        let mut prev = drive_terms(&cfg, -0.01).1.arg();
        let mut unwrapped = prev;
        let mut t = -0.01;
        let start = unwrapped;
        while t < 0.01 - dt / 2.0 {
            t += dt;
            let a = drive_terms(&cfg, t).1.arg();
            let mut d = a - prev;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            assert!(d > 0.0, "phase must wind monotonically");
            unwrapped += d;
            prev = a;
        }
        let rate = (unwrapped - start) / 0.02;
        assert!((rate - 7595.58).abs() < 1e-6);
    }

    #[test]
    fn unit_conversions() {
        assert!((units::mev_to_scaled(-5.0) + 7595.58).abs() < 1e-9);
        assert!((units::mev_to_scaled(-10.0) + 15191.16).abs() < 1e-9);
        assert!((units::ps_to_scaled(6.0) - 0.006).abs() < 1e-15);
        assert!((units::scaled_to_mev(units::mev_to_scaled(1.7)) - 1.7).abs() < 1e-15);
    }

    #[test]
    fn step_cap_resolves_beat() {
        let h = table_pulse().max_step_in_window();
        assert!((h - 2.0 * PI / (20.0 * 7595.58)).abs() < 1e-15);
    }

    #[test]
    fn validation_collects_every_error() {
        let cfg = SuperPulseConfig { sigma1: -1.0, alpha2: -2.0, theta: 4.0, ..SuperPulseConfig::default() };
        match cfg.validate() {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 3),
            other => panic!("expected validation errors, got {other:?}"),
        }
    }
}
