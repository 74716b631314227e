//! One function per subcommand. Each writes its files and returns the summary object.

use serde_json::{json, Value};
use swingup::collective::{dressed_basis, DressedState, Geometry};
use swingup::disorder::run_ensemble;
use swingup::dynamics::{build_model, simulate, uniform_grid, ConvergedRun, Populations};
use swingup::observables::{bloch_vector, emission_spectrum, exponential_rate, g2_direct, g2_function, photon_number};
use swingup::qalgebra::expectation;
use swingup::reproduce::{self, CriterionReport};
use swingup::sweep::{best_cell, phase_grid, run_heatmap, run_phase_sweep};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, Csv, Meta, OutDir};

const STATES: [DressedState; 4] = [DressedState::G, DressedState::Plus, DressedState::Minus, DressedState::X];

fn pop_columns() -> Vec<String> {
    STATES.iter().map(|s| format!("p_{}", s.label())).collect()
}

fn pop_values(p: &Populations) -> Vec<f64> {
    STATES.iter().map(|s| p.get(*s)).collect()
}

fn pop_json(p: &Populations) -> Value {
    json!({ "G": p.g, "plus": p.plus, "minus": p.minus, "X": p.x })
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn couplings(cfg: &RunConfig, meta: &Meta, out: &mut OutDir) -> Result<Value, CliError> {
    let mut csv = Csv::new(
        meta,
        &columns(&["d_over_lambda", "omega12", "gamma12", "gamma_plus", "gamma_minus", "e_x", "e_plus", "e_minus", "e_g"]),
    );
    let row = |d: f64| -> Result<Vec<f64>, CliError> {
        let geom = Geometry { d_over_lambda: d, ..cfg.geom };
        let b = dressed_basis(&geom, cfg.pulse.delta1)?;
        let e = b.energies;
        Ok(vec![d, b.shift, b.gamma12, b.gamma_plus(), b.gamma_minus(), e.x, e.plus, e.minus, e.g])
    };
    for d in cfg.couplings.values() {
        csv.row(&row(d)?);
    }
    out.csv("couplings.csv", &csv)?;
    let here = row(cfg.geom.d_over_lambda)?;
    let summary = json!({
        "d_over_lambda": here[0],
        "omega12": here[1],
        "gamma12": here[2],
        "gamma_plus": here[3],
        "gamma_minus": here[4],
    });
    out.json("couplings.json", meta, &summary)?;
    Ok(summary)
}

fn run_series(cfg: &RunConfig, t_end: f64, n: usize) -> Result<(Vec<f64>, ConvergedRun), CliError> {
    let t0 = cfg.start_time();
    let grid = uniform_grid(t0, t_end, n);
    let run = simulate(&cfg.system(), t0, &grid, &cfg.evolve_options())?;
    Ok((grid, run))
}

fn fock_json(run: &ConvergedRun) -> Value {
    json!({ "n_fock": run.n_fock, "converged": run.converged, "photon_change": num(run.photon_change) })
}

pub fn simulate_cmd(cfg: &RunConfig, meta: &Meta, out: &mut OutDir) -> Result<Value, CliError> {
    let (grid, run) = run_series(cfg, cfg.t_end, cfg.n_points)?;
    let photons = run.model.a.as_ref().map(|_| photon_number(&run.model, &run.trajectory)).transpose()?;
    let mut cols = vec!["t".to_string()];
    cols.extend(pop_columns());
    cols.push("trace".into());
    if photons.is_some() {
        cols.push("photons".into());
    }
    let mut csv = Csv::new(meta, &cols);
    for (k, rho) in run.trajectory.states.iter().enumerate() {
        let mut r = vec![grid[k]];
        r.extend(pop_values(&run.model.populations(rho)));
        r.push(rho.trace().re);
        if let Some(n) = &photons {
            r.push(n[k]);
        }
        csv.row(&r);
    }
    out.csv("simulate.csv", &csv)?;
    let last = run.model.populations(run.trajectory.last());
    let max_photons = photons.as_ref().map(|n| n.iter().cloned().fold(0.0, f64::max));
    let summary = json!({
        "t_end": run.trajectory.end_time(),
        "final": pop_json(&last),
        "max_photons": max_photons,
        "cavity": fock_json(&run),
    });
    out.json("simulate.json", meta, &summary)?;
    Ok(summary)
}

pub fn decay(cfg: &RunConfig, meta: &Meta, out: &mut OutDir) -> Result<Value, CliError> {
    let d = &cfg.decay;
    let (grid, run) = run_series(cfg, d.t_end, d.n_points)?;
    let pops: Vec<Populations> = run.trajectory.states.iter().map(|r| run.model.populations(r)).collect();
    let mut cols = vec!["t".to_string()];
    cols.extend(pop_columns());
    let mut csv = Csv::new(meta, &cols);
    for (t, p) in grid.iter().zip(&pops) {
        let mut r = vec![*t];
        r.extend(pop_values(p));
        csv.row(&r);
    }
    out.csv("decay.csv", &csv)?;
    let window: Vec<usize> = (0..grid.len()).filter(|&k| grid[k] >= d.fit_start && grid[k] <= d.fit_end).collect();
    let times: Vec<f64> = window.iter().map(|&k| grid[k]).collect();
    let fit = |s: DressedState| -> Value {
        let v: Vec<f64> = window.iter().map(|&k| pops[k].get(s)).collect();
        exponential_rate(&times, &v).map_or(Value::Null, num)
    };
    let basis = &run.model.dressed;
    let summary = json!({
        "fit_window": [d.fit_start, d.fit_end],
        "fit_points": times.len(),
        "rate_plus": fit(DressedState::Plus),
        "rate_minus": fit(DressedState::Minus),
        "expected_plus": basis.gamma_plus(),
        "expected_minus": basis.gamma_minus(),
        "final": pop_json(pops.last().expect("non-empty grid")),
    });
    out.json("decay.json", meta, &summary)?;
    Ok(summary)
}

pub fn sweep(cfg: &RunConfig, meta: &Meta, out: &mut OutDir) -> Result<Value, CliError> {
    let grid = cfg.sweep_grid();
    let map = run_heatmap(&grid, &cfg.evolve_options())?;
    let mut cols = vec![map.axis1.param.name().to_string(), map.axis2.param.name().to_string()];
    cols.extend(map.targets.iter().map(|s| format!("p_{}", s.label())));
    let mut csv = Csv::new(meta, &cols);
    let (v1, v2) = (map.axis1.values(), map.axis2.values());
    for (i, a) in v1.iter().enumerate() {
        for (j, b) in v2.iter().enumerate() {
            let mut r = vec![*a, *b];
            r.extend(map.targets.iter().map(|s| map.get(*s, i, j).unwrap_or(f64::NAN)));
            csv.row(&r);
        }
    }
    out.csv("sweep.csv", &csv)?;
    let mut best = serde_json::Map::new();
    for s in &map.targets {
        let v = match best_cell(&map, *s) {
            Ok(b) => serde_json::to_value(b).expect("plain data"),
            Err(_) => Value::Null,
        };
        best.insert(s.label().to_string(), v);
    }
    let failures: Vec<Value> = map.failures.iter().map(|f| json!(f)).collect();
    let summary = json!({
        "axis1": map.axis1,
        "axis2": map.axis2,
        "best_cell": best,
        "failures": failures,
    });
    out.json("sweep.json", meta, &summary)?;
    Ok(summary)
}

pub fn phase_sweep(cfg: &RunConfig, meta: &Meta, out: &mut OutDir) -> Result<Value, CliError> {
    let thetas = phase_grid(cfg.phase_sweep.n_phases);
    let times = uniform_grid(cfg.start_time(), cfg.t_end, cfg.phase_sweep.n_times);
    let ps = run_phase_sweep(&cfg.system(), &thetas, &times, &cfg.evolve_options())?;
    let mut cols = columns(&["theta", "t"]);
    cols.extend(pop_columns());
    let mut csv = Csv::new(meta, &cols);
    for (k, th) in thetas.iter().enumerate() {
        for (m, t) in times.iter().enumerate() {
            let mut r = vec![*th, *t];
            match &ps.populations[k] {
                Some(row) => r.extend(pop_values(&row[m])),
                None => r.extend([f64::NAN; 4]),
            }
            csv.row(&r);
        }
    }
    out.csv("phase_sweep.csv", &csv)?;
    let mut finals = serde_json::Map::new();
    let mut argmax = serde_json::Map::new();
    for s in STATES {
        let v = ps.final_values(s);
        let best = (0..v.len()).filter(|&k| v[k].is_some()).max_by(|&a, &b| v[a].unwrap_or(f64::NAN).total_cmp(&v[b].unwrap_or(f64::NAN)));
        finals.insert(s.label().into(), json!(v));
        argmax.insert(s.label().into(), best.map_or(Value::Null, |k| json!(thetas[k])));
    }
    let summary = json!({
        "thetas": thetas,
        "final": finals,
        "argmax_theta": argmax,
        "failures": ps.failures,
    });
    out.json("phase_sweep.json", meta, &summary)?;
    Ok(summary)
}

pub fn spectrum(cfg: &RunConfig, meta: &Meta, out: &mut OutDir) -> Result<Value, CliError> {
    let model = build_model(&cfg.system())?;
    let s = emission_spectrum(&model, cfg.start_time(), &cfg.spectrum, &cfg.evolve_options().integrator)?;
    let mut csv = Csv::new(meta, &columns(&["omega_minus_delta_c", "s"]));
    for (f, v) in s.frequencies.iter().zip(&s.values) {
        csv.row(&[*f, *v]);
    }
    out.csv("spectrum.csv", &csv)?;
    let peaks: Vec<Value> = s.peaks(0.05).iter().map(|(f, v)| json!({ "omega_minus_delta_c": f, "height": v })).collect();
    let summary = json!({
        "window": [s.window.0, s.window.1],
        "peaks": peaks,
        "min_before_clip": s.min_before_clip,
        "peak_raw": s.peak_raw,
    });
    out.json("spectrum.json", meta, &summary)?;
    Ok(summary)
}

pub fn g2(cfg: &RunConfig, meta: &Meta, out: &mut OutDir) -> Result<Value, CliError> {
    let g = &cfg.g2;
    if cfg.cavity.is_none() {
        return Err(CliError::Validation(vec!["g2 needs a cavity section".into()]));
    }
    if !(g.tau_f > cfg.start_time()) {
        return Err(CliError::Validation(vec![format!("g2.tau_f must follow the start time {} (got {})", cfg.start_time(), g.tau_f)]));
    }
    let (_, run) = run_series(cfg, g.tau_f, cfg.n_points)?;
    let rho = run.trajectory.last();
    let r = g2_function(&run.model, rho, g.tau_f, &g.delays(), g.mode, &cfg.evolve_options().integrator)?;
    let mut csv = Csv::new(meta, &columns(&["tau", "g2", "numerator", "denominator", "masked"]));
    for k in 0..r.tau_t.len() {
        csv.row(&[r.tau_t[k], r.values[k], r.numerator[k], r.denominator[k], if r.masked[k] { 1.0 } else { 0.0 }]);
    }
    out.csv("g2.csv", &csv)?;
    let n = run.model.photon_number_op().map(|op| expectation(&op, rho)).transpose()?.map(|c| c.re);
    let summary = json!({
        "tau_f": g.tau_f,
        "g2_at_zero": r.at_zero().map(num),
        "g2_direct": num(g2_direct(&run.model, rho)?),
        "photons_at_tau_f": n,
        "cavity": fock_json(&run),
    });
    out.json("g2.json", meta, &summary)?;
    Ok(summary)
}

pub fn bloch(cfg: &RunConfig, meta: &Meta, out: &mut OutDir) -> Result<Value, CliError> {
    let (grid, run) = run_series(cfg, cfg.t_end, cfg.n_points)?;
    let targets = [DressedState::Plus, DressedState::Minus, DressedState::X];
    let mut cols = vec!["t".to_string()];
    for s in targets {
        for c in ["u", "v", "w", "norm"] {
            cols.push(format!("{}_{c}", s.label()));
        }
    }
    let mut csv = Csv::new(meta, &cols);
    let mut last = Vec::new();
    for (t, rho) in grid.iter().zip(&run.trajectory.states) {
        let rho_e = run.model.bare_emitter_state(rho);
        let mut r = vec![*t];
        last.clear();
        for s in targets {
            let b = bloch_vector(&rho_e, s, &run.model.dressed);
            r.extend(b.components);
            r.push(b.norm());
            last.push(b);
        }
        csv.row(&r);
    }
    out.csv("bloch.csv", &csv)?;
    let mut finals = serde_json::Map::new();
    for (s, b) in targets.iter().zip(&last) {
        finals.insert(s.label().into(), json!({ "components": b.components, "norm": b.norm() }));
    }
    let summary = json!({ "t_end": run.trajectory.end_time(), "final": finals });
    out.json("bloch.json", meta, &summary)?;
    Ok(summary)
}

pub fn disorder(cfg: &RunConfig, meta: &Meta, out: &mut OutDir) -> Result<Value, CliError> {
    let spec = cfg.disorder_spec();
    let obs = &cfg.disorder.observables;
    let r = run_ensemble(&cfg.system(), &spec, obs, &cfg.evolve_options())?;
    let mut cols = columns(&["sample", "draw1", "draw2", "resamples"]);
    cols.extend(obs.iter().map(|o| o.label()));
    let mut csv = Csv::new(meta, &cols);
    for s in &r.samples {
        let mut row = vec![s.index as f64, s.draws[0], s.draws[1], s.resamples as f64];
        if s.values.is_empty() {
            row.extend(vec![f64::NAN; obs.len()]);
        } else {
            row.extend(&s.values);
        }
        csv.row(&row);
    }
    let pad = [f64::NAN; 3];
    let mut mean = pad.to_vec();
    mean.extend(r.stats.iter().map(|s| s.mean));
    let mut se = pad.to_vec();
    se.extend(r.stats.iter().map(|s| s.std_error));
    csv.labelled_row("mean", &mean);
    csv.labelled_row("std_error", &se);
    out.csv("disorder.csv", &csv)?;
    let stats: Vec<Value> = obs
        .iter()
        .zip(&r.stats)
        .map(|(o, s)| json!({ "observable": o.label(), "mean": num(s.mean), "std_error": num(s.std_error), "n": s.n }))
        .collect();
    let errors: Vec<Value> =
        r.samples.iter().filter_map(|s| s.error.as_ref().map(|e| json!({ "sample": s.index, "error": e }))).collect();
    let summary = json!({
        "spec": spec,
        "stats": stats,
        "failures": r.failures,
        "resamples": r.resamples,
        "errors": errors,
    });
    out.json("disorder.json", meta, &summary)?;
    Ok(summary)
}

fn report_json(r: &CriterionReport) -> Value {
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| json!({ "label": c.label, "value": num(c.value), "requirement": c.requirement, "passed": c.passed }))
        .collect();
    json!({ "id": r.id, "title": r.title, "passed": r.passed(), "seconds": r.seconds, "error": r.error, "checks": checks })
}

/// Runs the selected acceptance criteria, all when `ids` is empty, printing one line each.
pub fn reproduce(ids: &[u8], meta: &Meta, out: &mut OutDir) -> Result<Value, CliError> {
    let ids: Vec<u8> = if ids.is_empty() { reproduce::CRITERIA.iter().map(|c| c.0).collect() } else { ids.to_vec() };
    let mut reports = Vec::new();
    for id in ids {
        let r = reproduce::run(id).ok_or_else(|| CliError::Validation(vec![format!("no criterion {id}")]))?;
        println!("{r}");
        reports.push(r);
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    let summary = json!({
        "passed": passed,
        "total": reports.len(),
        "criteria": reports.iter().map(report_json).collect::<Vec<_>>(),
    });
    out.json("reproduce.json", meta, &summary)?;
    Ok(summary)
}

/// Unit conversions between the scaled units and meV or ps.
pub fn convert_units(mev: Option<f64>, ps: Option<f64>, to_mev: Option<f64>, to_ps: Option<f64>) -> Value {
    use swingup::drive::units;
    if let Some(x) = mev {
        json!({ "mev": x, "scaled": units::mev_to_scaled(x) })
    } else if let Some(x) = ps {
        json!({ "ps": x, "scaled": units::ps_to_scaled(x) })
    } else if let Some(x) = to_mev {
        json!({ "scaled": x, "mev": units::scaled_to_mev(x) })
    } else {
        let x = to_ps.expect("clap requires one conversion");
        json!({ "scaled": x, "ps": units::scaled_to_ps(x) })
    }
}

