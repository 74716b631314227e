//! Browser bindings. Every export returns a flat `Float64Array` of fixed-width rows.

use std::f64::consts::PI;

use swingup::collective::{dressed_basis, DressedState, Geometry};
use swingup::dynamics::{simulate, uniform_grid, EvolveOptions, SystemConfig};
use swingup::presets;
use swingup::sweep::{phase_grid, run_phase_sweep};
use wasm_bindgen::prelude::*;

fn target(name: &str) -> Result<DressedState, JsError> {
    match name {
        "plus" => Ok(DressedState::Plus),
        "minus" => Ok(DressedState::Minus),
        "x" | "X" => Ok(DressedState::X),
        other => Err(JsError::new(&format!("unknown target `{other}`"))),
    }
}

fn err(e: swingup::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Rows `[d/λ, Ω₁₂, Γ₁₂, Γ₊, Γ₋]` on a logarithmic grid of perpendicular dipoles.
#[wasm_bindgen]
pub fn couplings(d_min: f64, d_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    if !(d_min > 0.0 && d_max > d_min && n >= 2) {
        return Err(JsError::new("need 0 < d_min < d_max and n >= 2"));
    }
    let mut out = Vec::with_capacity(5 * n);
    for k in 0..n {
        let d = d_min * (d_max / d_min).powf(k as f64 / (n - 1) as f64);
        let b = dressed_basis(&Geometry::perpendicular(d), -7595.58).map_err(err)?;
        out.extend([d, b.shift, b.gamma12, b.gamma_plus(), b.gamma_minus()]);
    }
    Ok(out)
}

/// Preset pulse parameters `[α₁/π, α₂/π, τ, ϑ]` for a target.
#[wasm_bindgen]
pub fn preset(name: &str) -> Result<Vec<f64>, JsError> {
    let p = presets::target_config(target(name)?, 0.01).map_err(err)?.pulse;
    Ok(vec![p.alpha1 / PI, p.alpha2 / PI, p.tau, p.theta])
}

fn config(d: f64, alpha1_pi: f64, alpha2_pi: f64, tau: f64, theta: f64) -> SystemConfig {
    let mut cfg = presets::plus_target(d);
    cfg.pulse.alpha1 = alpha1_pi * PI;
    cfg.pulse.alpha2 = alpha2_pi * PI;
    cfg.pulse.tau = tau;
    cfg.pulse.theta = theta;
    cfg
}

/// Rows `[t, P_G, P₊, P₋, P_X]` from the ground state up to `t_end`.
#[wasm_bindgen]
pub fn populations(d: f64, alpha1_pi: f64, alpha2_pi: f64, tau: f64, theta: f64, t_end: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let cfg = config(d, alpha1_pi, alpha2_pi, tau, theta);
    cfg.validate().map_err(err)?;
    let t0 = cfg.start_time();
    if !(t_end > t0 && n >= 2) {
        return Err(JsError::new(&format!("need t_end > {t0} and n >= 2")));
    }
    let grid = uniform_grid(t0, t_end, n);
    let run = simulate(&cfg, t0, &grid, &EvolveOptions::default()).map_err(err)?;
    let mut out = Vec::with_capacity(5 * n);
    for (t, rho) in grid.iter().zip(&run.trajectory.states) {
        let p = run.model.populations(rho);
        out.extend([*t, p.g, p.plus, p.minus, p.x]);
    }
    Ok(out)
}

/// Rows `[ϑ, P_G, P₊, P₋, P_X]` at `t_end` over `n_phases` relative phases.
#[wasm_bindgen]
pub fn phase_scan(d: f64, alpha1_pi: f64, alpha2_pi: f64, tau: f64, t_end: f64, n_phases: usize) -> Result<Vec<f64>, JsError> {
    let cfg = config(d, alpha1_pi, alpha2_pi, tau, 0.0);
    let thetas = phase_grid(n_phases);
    let scan = run_phase_sweep(&cfg, &thetas, &[t_end], &EvolveOptions::default()).map_err(err)?;
    let mut out = Vec::with_capacity(5 * thetas.len());
    for (th, row) in thetas.iter().zip(&scan.populations) {
        let p = row.as_ref().and_then(|r| r.last()).copied();
        let p = p.map_or([f64::NAN; 4], |p| [p.g, p.plus, p.minus, p.x]);
        out.push(*th);
        out.extend(p);
    }
    Ok(out)
}
