//! Reference scenarios with fixed pass criteria, shared by the acceptance
//! harness and the `reproduce` command.

use std::fmt;
use std::time::Instant;

use crate::collective::{collective_decay, collective_shift, perpendicular_decay, perpendicular_shift, DressedState, Geometry};
use crate::dynamics::{build_model, evolve, simulate, uniform_grid, Basis, EvolveOptions, SystemConfig};
use crate::error::Result;
use crate::observables::{converged_spectrum, exponential_rate, g2_direct, g2_function, photon_number, side_peaks, QrtMode, SpectrumConfig};
use crate::presets::{self, KAPPA_OVER_G, T_END};
use crate::qalgebra::{lift_emitter_matrix, max_abs, DensityMatrix};
use crate::sweep::{final_state, phase_grid, run_heatmap, run_phase_sweep, Axis, SweepGrid, SweepParam};

/// One measured quantity against its requirement.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub requirement: String,
    pub passed: bool,
}

impl Check {
    fn at_least(label: impl Into<String>, value: f64, lo: f64) -> Check {
        Check { label: label.into(), value, requirement: format!(">= {lo}"), passed: value >= lo }
    }

    fn at_most(label: impl Into<String>, value: f64, hi: f64) -> Check {
        Check { label: label.into(), value, requirement: format!("<= {hi}"), passed: value <= hi }
    }

    fn within(label: impl Into<String>, value: f64, target: f64, tol: f64) -> Check {
        Check { label: label.into(), value, requirement: format!("{target} ± {tol}"), passed: (value - target).abs() <= tol }
    }

    fn relative(label: impl Into<String>, value: f64, target: f64, rel: f64) -> Check {
        let passed = ((value - target) / target).abs() <= rel;
        Check { label: label.into(), value, requirement: format!("{target} ± {}%", rel * 100.0), passed }
    }

    fn factor(label: impl Into<String>, value: f64, target: f64, f: f64) -> Check {
        let passed = value > 0.0 && value <= target * f && value >= target / f;
        Check { label: label.into(), value, requirement: format!("{target} within x{f}"), passed }
    }

    fn flag(label: impl Into<String>, ok: bool) -> Check {
        Check { label: label.into(), value: if ok { 1.0 } else { 0.0 }, requirement: "holds".into(), passed: ok }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2}. {} ({:.1} s)", self.id, self.title, self.seconds)?;
        if let Some(e) = &self.error {
            write!(f, ": error: {e}")?;
        }
        for c in &self.checks {
            let mark = if c.passed { "" } else { " !" };
            write!(f, "; {} = {:.6e} ({}){mark}", c.label, c.value, c.requirement)?;
        }
        Ok(())
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "superradiant preparation"),
    (2, "subradiant preparation"),
    (3, "doubly excited preparation"),
    (4, "collective decay rates"),
    (5, "photon correlation table"),
    (6, "cavity emission spectrum peaks"),
    (7, "intracavity photon cap"),
    (8, "cavity robustness of the bright state"),
    (9, "property suite"),
    (10, "relative phase behaviour"),
];

/// Runs criterion `id`; unknown ids yield `None`.
pub fn run(id: u8) -> Option<CriterionReport> {
    let title = CRITERIA.iter().find(|c| c.0 == id)?.1;
    let start = Instant::now();
    let out = match id {
        1 => superradiant(),
        2 => subradiant(),
        3 => doubly_excited(),
        4 => decay_rates(),
        5 => correlation_table(),
        6 => spectrum_peaks(),
        7 => photon_cap(),
        8 => cavity_robustness(),
        9 => property_suite(),
        _ => phase_behaviour(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (checks, error) = match out {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    Some(CriterionReport { id, title, checks, error, seconds })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|c| run(c.0)).collect()
}

fn opts() -> EvolveOptions {
    EvolveOptions::default()
}

fn superradiant() -> Result<Vec<Check>> {
    let t = Instant::now();
    let p = final_state(&presets::plus_target(0.01), T_END, &opts())?;
    Ok(vec![Check::at_least("P+", p.plus, 0.91), Check::at_most("seconds", t.elapsed().as_secs_f64(), 60.0)])
}

fn subradiant() -> Result<Vec<Check>> {
    let t = Instant::now();
    let p = final_state(&presets::minus_target(0.01), T_END, &opts())?;
    Ok(vec![Check::at_least("P-", p.minus, 0.99), Check::at_most("seconds", t.elapsed().as_secs_f64(), 60.0)])
}

fn doubly_excited() -> Result<Vec<Check>> {
    let far = final_state(&presets::x_target(0.1), T_END, &opts())?;
    let near = final_state(&presets::x_target(0.01), T_END, &opts())?;
    Ok(vec![
        Check::at_least("P_X(d=0.1)", far.x, 0.95),
        Check::at_most("P_X(d=0.01)", near.x, 0.10),
        Check::at_least("P+(d=0.01)", near.plus, 0.60),
    ])
}

fn decay_rates() -> Result<Vec<Check>> {
    let cfg = presets::plus_target(0.01);
    let model = build_model(&cfg)?;
    let rho0 = DensityMatrix::ground(model.space().clone());
    let grid = uniform_grid(0.05, 0.5, 91);
    let traj = evolve(&model, &rho0, cfg.start_time(), &grid, &opts())?;
    let p: Vec<f64> = traj.states.iter().map(|r| model.populations(r).plus).collect();
    let rate = exponential_rate(&grid, &p)?;
    let expected = cfg.geom.gamma + collective_decay(&cfg.geom)?;

    let cfg = presets::minus_target(0.01);
    let model = build_model(&cfg)?;
    let traj = evolve(&model, &rho0, cfg.start_time(), &[T_END, 1.0], &opts())?;
    let stored = model.populations(traj.last()).minus;
    Ok(vec![Check::relative("rate+", rate, expected, 0.03), Check::at_least("P-(t=1)", stored, 0.98)])
}

/// Reference `g²(τ_f, 0)` per target and κ/g.
pub const TABLE_G2: [(DressedState, [f64; 3]); 3] = [
    (DressedState::Plus, [1.20e-2, 6.02e-3, 1.68e-4]),
    (DressedState::Minus, [3.49e-5, 1.05e-5, 1.22e-6]),
    (DressedState::X, [0.65, 0.62, 0.63]),
];

/// `(g² by regression, g² direct)` at the end of the pulses for a resonant-cavity run.
pub fn table_cell(target: DressedState, kappa_over_g: f64) -> Result<(f64, f64)> {
    let cfg = presets::resonant_cavity_run(target, kappa_over_g)?;
    let t0 = cfg.start_time();
    let run = simulate(&cfg, t0, &uniform_grid(t0, T_END, 57), &opts())?;
    let rho = run.trajectory.last();
    let qrt = g2_function(&run.model, rho, T_END, &[0.0], QrtMode::TimeDependent, &opts().integrator)?;
    Ok((qrt.values[0], g2_direct(&run.model, rho)?))
}

fn correlation_table() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (target, row) in TABLE_G2 {
        let mut got = Vec::new();
        for (k, want) in KAPPA_OVER_G.iter().zip(row) {
            let (g2, _) = table_cell(target, *k)?;
            let label = format!("g2[{},k={k}g]", target.label());
            checks.push(if want >= 1e-4 { Check::relative(label, g2, want, 0.25) } else { Check::factor(label, g2, want, 3.0) });
            got.push(g2);
        }
        if target != DressedState::X {
            let trend = |v: &[f64]| v.windows(2).map(|w| w[1] < w[0]).collect::<Vec<_>>();
            checks.push(Check::flag(format!("trend[{}]", target.label()), trend(&got) == trend(&row)));
        }
    }
    Ok(checks)
}

fn spectrum_peaks() -> Result<Vec<Check>> {
    let t = Instant::now();
    let mut checks = Vec::new();
    for (k, want) in KAPPA_OVER_G.iter().zip([Some(141.11), Some(136.91), None]) {
        let cfg = presets::resonant_cavity_run(DressedState::Plus, *k)?;
        let model = build_model(&cfg)?;
        let (s, _, _) = converged_spectrum(&model, cfg.start_time(), &SpectrumConfig::default(), &opts().integrator, 0.5, 2)?;
        match want {
            Some(w) => {
                let (lo, hi) = side_peaks(&s);
                checks.push(Check::within(format!("-peak[k={k}g]"), lo.map_or(f64::NAN, |p| -p.0), w, 3.0));
                checks.push(Check::within(format!("+peak[k={k}g]"), hi.map_or(f64::NAN, |p| p.0), w, 3.0));
            }
            None => {
                let top = s.peaks(0.5);
                checks.push(Check::flag(format!("single maximum[k={k}g]"), top.len() == 1));
                checks.push(Check::at_most(format!("|peak|[k={k}g]"), top.first().map_or(f64::NAN, |p| p.0.abs()), 5.0));
            }
        }
    }
    checks.push(Check::at_most("seconds", t.elapsed().as_secs_f64(), 1800.0));
    Ok(checks)
}

fn photon_cap() -> Result<Vec<Check>> {
    let cfg = presets::resonant_cavity_run(DressedState::X, 0.2)?;
    let t0 = cfg.start_time();
    let run = simulate(&cfg, t0, &uniform_grid(t0, 0.3, 601), &opts())?;
    let n = photon_number(&run.model, &run.trajectory)?;
    Ok(vec![Check::within("max <a+a>", n.iter().cloned().fold(0.0, f64::max), 1.5, 0.15)])
}

fn cavity_robustness() -> Result<Vec<Check>> {
    let base = presets::plus_target(0.01);
    let t0 = base.start_time();
    let mut peaks = Vec::new();
    for k in KAPPA_OVER_G {
        let cfg = presets::with_cavity(&base, k, base.pulse.delta1, (0.0, 0.0));
        let run = simulate(&cfg, t0, &uniform_grid(t0, 0.1, 801), &opts())?;
        let peak = run.trajectory.states.iter().map(|r| run.model.populations(r).plus).fold(0.0, f64::max);
        peaks.push(peak);
    }
    let spread = peaks.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - peaks.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(vec![Check::at_most("spread of max P+", spread, 0.02)])
}

fn property_suite() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let checked = EvolveOptions { check_states: true, ..opts() };

    let mut states_ok = true;
    for cfg in [presets::plus_target(0.01), presets::minus_target(0.01), presets::resonant_cavity_run(DressedState::X, 0.2)?] {
        let t0 = cfg.start_time();
        states_ok &= simulate(&cfg, t0, &uniform_grid(t0, 0.1, 400), &checked).is_ok();
    }
    checks.push(Check::flag("valid states at every output", states_ok));

    let mut dev: f64 = 0.0;
    for cfg in [presets::plus_target(0.01), presets::resonant_cavity_run(DressedState::Minus, 1.0)?] {
        let t0 = cfg.start_time();
        let grid = uniform_grid(t0, 0.05, 60);
        let bare = build_model(&cfg)?;
        let dressed = build_model(&SystemConfig { basis: Basis::Dressed, ..cfg })?;
        let rho0 = DensityMatrix::ground(bare.space().clone());
        let a = evolve(&bare, &rho0, t0, &grid, &opts())?;
        let b = evolve(&dressed, &rho0, t0, &grid, &opts())?;
        let u = lift_emitter_matrix(&crate::collective::dressed_transform(), bare.space())?;
        for (x, y) in a.states.iter().zip(&b.states) {
            dev = dev.max(max_abs(&(&u * y.matrix() * u.adjoint() - x.matrix())));
        }
    }
    checks.push(Check::at_most("bare vs dressed", dev, 1e-6));

    let mut spread: f64 = 0.0;
    for cfg in [presets::plus_target(0.01), presets::minus_target(0.01), presets::x_target(0.1)] {
        let reference = final_state(&cfg, T_END, &opts())?;
        for phi in [std::f64::consts::FRAC_PI_2, std::f64::consts::PI] {
            let mut c = cfg;
            c.pulse.phi_x = phi;
            let p = final_state(&c, T_END, &opts())?;
            for s in DressedState::ALL {
                spread = spread.max((p.get(s) - reference.get(s)).abs());
            }
        }
    }
    checks.push(Check::at_most("phi_X dependence", spread, 1e-6));

    let cfg = presets::plus_target(0.01);
    let t0 = cfg.start_time();
    let model = build_model(&cfg)?;
    let traj = evolve(&model, &DensityMatrix::ground(model.space().clone()), t0, &uniform_grid(t0, 0.1, 500), &opts())?;
    let leak = traj.states.iter().map(|r| model.populations(r).minus).fold(0.0, f64::max);
    checks.push(Check::at_most("max P- at theta=0", leak, 1e-3));

    let mut rel: f64 = 0.0;
    for (target, k) in [(DressedState::Plus, 1.0), (DressedState::X, 0.2)] {
        let (q, d) = table_cell(target, k)?;
        rel = rel.max(((q - d) / d).abs());
    }
    checks.push(Check::at_most("QRT vs direct g2", rel, 1e-8));

    let g = collective_decay(&Geometry::perpendicular(crate::collective::MIN_D_OVER_LAMBDA))?;
    checks.push(Check::at_most("|G12(d->0) - G|", (g - 1.0).abs(), 1e-4));
    let mut eq: f64 = 0.0;
    for k in 0..100 {
        let d = 0.005 + (2.0 - 0.005) * k as f64 / 99.0;
        let geom = Geometry::perpendicular(d);
        let (s, p) = (collective_shift(&geom)?, perpendicular_shift(d, 1.0)?);
        let (gd, pd) = (collective_decay(&geom)?, perpendicular_decay(d, 1.0)?);
        eq = eq.max(((s - p) / p.abs().max(1.0)).abs()).max((gd - pd).abs());
    }
    checks.push(Check::at_most("general vs perpendicular coupling", eq, 1e-12));

    let grid = SweepGrid {
        axis1: Axis::new(SweepParam::Alpha1Pi, 60.0, 75.0, 4),
        axis2: Axis::new(SweepParam::Alpha2Pi, 55.0, 65.0, 4),
        fixed: presets::plus_target(0.01),
        targets: vec![DressedState::Plus, DressedState::X],
        t_end: T_END,
    };
    let first = run_heatmap(&grid, &opts())?;
    let second = run_heatmap(&grid, &opts())?;
    let mut serial_match = true;
    for i in 0..4 {
        for j in 0..4 {
            let p = final_state(&grid.config_at(i, j), T_END, &opts())?;
            serial_match &= first.get(DressedState::Plus, i, j) == Some(p.plus);
        }
    }
    checks.push(Check::flag("heatmap determinism", first == second && serial_match));
    Ok(checks)
}

fn phase_behaviour() -> Result<Vec<Check>> {
    let thetas = phase_grid(21);
    let x = run_phase_sweep(&presets::x_target(0.1), &thetas, &[T_END], &opts())?;
    let px: Vec<f64> = x.final_values(DressedState::X).into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let flat = px.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - px.iter().cloned().fold(f64::INFINITY, f64::min);
    let p = run_phase_sweep(&presets::plus_target(0.01), &thetas, &[T_END], &opts())?;
    let pp: Vec<f64> = p.final_values(DressedState::Plus).into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let argmax = (0..pp.len()).max_by(|&a, &b| pp[a].total_cmp(&pp[b])).unwrap_or(0);
    Ok(vec![Check::at_most("spread of P_X over theta", flat, 0.01), Check::within("argmax theta of P+", thetas[argmax], 0.0, 0.0)])
}
