//! Equidistant two-parameter heatmaps of final populations, relative-phase
//! sweeps, and argmax reporting.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::collective::DressedState;
use crate::dynamics::{build_model, evolve, EvolveOptions, Populations, SystemConfig};
use crate::error::{Error, Result};
use crate::qalgebra::DensityMatrix;

/// Parameter swept along one heatmap axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// First pulse area in units of π.
    Alpha1Pi,
    /// Second pulse area in units of π.
    Alpha2Pi,
    Tau,
    Theta,
    PhiX,
    DOverLambda,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Alpha1Pi => "alpha1_pi",
            SweepParam::Alpha2Pi => "alpha2_pi",
            SweepParam::Tau => "tau",
            SweepParam::Theta => "theta",
            SweepParam::PhiX => "phi_x",
            SweepParam::DOverLambda => "d_over_lambda",
        }
    }

    pub fn apply(&self, cfg: &mut SystemConfig, v: f64) {
        match self {
            SweepParam::Alpha1Pi => cfg.pulse.alpha1 = v * PI,
            SweepParam::Alpha2Pi => cfg.pulse.alpha2 = v * PI,
            SweepParam::Tau => cfg.pulse.tau = v,
            SweepParam::Theta => cfg.pulse.theta = v,
            SweepParam::PhiX => cfg.pulse.phi_x = v,
            SweepParam::DOverLambda => cfg.geom.d_over_lambda = v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
}

impl Axis {
    pub fn new(param: SweepParam, lo: f64, hi: f64, n_points: usize) -> Self {
        Axis { param, lo, hi, n_points }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.n_points - 1) as f64;
        (0..self.n_points).map(|k| if k + 1 == self.n_points { self.hi } else { self.lo + h * k as f64 }).collect()
    }

    /// Index of the grid value closest to `v`.
    pub fn nearest(&self, v: f64) -> usize {
        let vals = self.values();
        (0..vals.len()).min_by(|&a, &b| (vals[a] - v).abs().total_cmp(&(vals[b] - v).abs())).unwrap_or(0)
    }

    fn collect_errors(&self, prefix: &str, errs: &mut Vec<String>) {
        if self.n_points == 0 {
            errs.push(format!("{prefix}.n_points must be >= 1"));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            errs.push(format!("{prefix} bounds must be finite"));
        } else if self.n_points > 1 && self.lo >= self.hi {
            errs.push(format!("{prefix}: lo must be < hi (got {} >= {})", self.lo, self.hi));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axis1: Axis,
    pub axis2: Axis,
    pub fixed: SystemConfig,
    pub targets: Vec<DressedState>,
    /// Time at which populations are read.
    pub t_end: f64,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        self.axis1.collect_errors("axis1", &mut errs);
        self.axis2.collect_errors("axis2", &mut errs);
        if self.targets.is_empty() {
            errs.push("targets must not be empty".into());
        }
        if !(self.t_end > self.fixed.start_time()) {
            errs.push(format!("t_end must follow the start of the drive (got {})", self.t_end));
        }
        if let Err(Error::Validation(v)) = self.fixed.validate() {
            errs.extend(v);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    pub fn config_at(&self, i: usize, j: usize) -> SystemConfig {
        let mut cfg = self.fixed;
        self.axis1.param.apply(&mut cfg, self.axis1.values()[i]);
        self.axis2.param.apply(&mut cfg, self.axis2.values()[j]);
        cfg
    }
}

/// Final populations on the grid, row-major over `(axis1, axis2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub axis1: Axis,
    pub axis2: Axis,
    pub targets: Vec<DressedState>,
    /// `values[target][i * n2 + j]`; `None` marks a failed point.
    pub values: Vec<Vec<Option<f64>>>,
    pub failures: Vec<(usize, usize, String)>,
}

impl Heatmap {
    pub fn get(&self, target: DressedState, i: usize, j: usize) -> Option<f64> {
        let k = self.targets.iter().position(|t| *t == target)?;
        self.values[k][i * self.axis2.n_points + j]
    }
}

/// Final dressed populations of one configuration at `t_end`, from the ground state.
pub fn final_state(cfg: &SystemConfig, t_end: f64, opts: &EvolveOptions) -> Result<Populations> {
    let model = build_model(cfg)?;
    let rho0 = DensityMatrix::ground(model.space().clone());
    let traj = evolve(&model, &rho0, cfg.start_time(), &[t_end], opts)?;
    Ok(model.populations(traj.last()))
}

/// One simulation per grid point; failed points are recorded, not fatal.
pub fn run_heatmap(grid: &SweepGrid, opts: &EvolveOptions) -> Result<Heatmap> {
    grid.validate()?;
    let (n1, n2) = (grid.axis1.n_points, grid.axis2.n_points);
    let results = crate::par::map(n1 * n2, |k| final_state(&grid.config_at(k / n2, k % n2), grid.t_end, opts));
    let mut values = vec![vec![None; n1 * n2]; grid.targets.len()];
    let mut failures = Vec::new();
    let mut first_error = None;
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => {
                for (t, s) in grid.targets.iter().enumerate() {
                    values[t][k] = Some(p.get(*s));
                }
            }
            Err(e) => {
                failures.push((k / n2, k % n2, e.to_string()));
                first_error.get_or_insert(e);
            }
        }
    }
    if failures.len() == n1 * n2 {
        return Err(first_error.expect("grid is non-empty"));
    }
    Ok(Heatmap { axis1: grid.axis1, axis2: grid.axis2, targets: grid.targets.clone(), values, failures })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestCell {
    pub i: usize,
    pub j: usize,
    pub axis1_value: f64,
    pub axis2_value: f64,
    pub value: f64,
    /// Other cells attaining the same value.
    pub ties: usize,
}

/// Argmax over present cells; ties go to the lowest `(i, j)`.
pub fn best_cell(map: &Heatmap, target: DressedState) -> Result<BestCell> {
    let t = map
        .targets
        .iter()
        .position(|s| *s == target)
        .ok_or_else(|| Error::Precondition(format!("target {} was not recorded", target.label())))?;
    let mut best: Option<(usize, f64)> = None;
    let mut ties = 0;
    for (k, v) in map.values[t].iter().enumerate() {
        let Some(v) = *v else { continue };
        match best {
            Some((_, b)) if v < b => {}
            Some((_, b)) if v == b => ties += 1,
            _ => {
                best = Some((k, v));
                ties = 0;
            }
        }
    }
    let (k, value) = best.ok_or_else(|| Error::Empty("every heatmap cell is missing".into()))?;
    let n2 = map.axis2.n_points;
    let (i, j) = (k / n2, k % n2);
    Ok(BestCell { i, j, axis1_value: map.axis1.values()[i], axis2_value: map.axis2.values()[j], value, ties })
}

/// `ϑ_k = 2πk/n` for `k = −⌊n/2⌋ ..= ⌊n/2⌋`; odd `n` keeps `ϑ = 0` on the grid.
pub fn phase_grid(n: usize) -> Vec<f64> {
    let h = (n / 2) as i64;
    (-h..=h).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Population surfaces over `(ϑ, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweep {
    pub thetas: Vec<f64>,
    pub times: Vec<f64>,
    /// `populations[k][m]` at `thetas[k]`, `times[m]`; `None` rows failed.
    pub populations: Vec<Option<Vec<Populations>>>,
    pub failures: Vec<(usize, String)>,
}

impl PhaseSweep {
    /// Final population of `s` per phase.
    pub fn final_values(&self, s: DressedState) -> Vec<Option<f64>> {
        self.populations.iter().map(|r| r.as_ref().and_then(|r| r.last()).map(|p| p.get(s))).collect()
    }
}

pub fn run_phase_sweep(cfg: &SystemConfig, thetas: &[f64], times: &[f64], opts: &EvolveOptions) -> Result<PhaseSweep> {
    cfg.validate()?;
    if thetas.is_empty() || times.is_empty() {
        return Err(Error::Precondition("phase sweep needs phases and output times".into()));
    }
    let run = |k: usize| -> Result<Vec<Populations>> {
        let mut c = *cfg;
        c.pulse.theta = thetas[k];
        let model = build_model(&c)?;
        let rho0 = DensityMatrix::ground(model.space().clone());
        let traj = evolve(&model, &rho0, c.start_time().min(times[0]), times, opts)?;
        Ok(traj.states.iter().map(|r| model.populations(r)).collect())
    };
    let results = crate::par::map(thetas.len(), run);
    let mut failures = Vec::new();
    let mut first_error = None;
    let populations = results
        .into_iter()
        .enumerate()
        .map(|(k, r)| match r {
            Ok(v) => Some(v),
            Err(e) => {
                failures.push((k, e.to_string()));
                first_error.get_or_insert(e);
                None
            }
        })
        .collect();
    if failures.len() == thetas.len() {
        return Err(first_error.expect("non-empty phase grid"));
    }
    Ok(PhaseSweep { thetas: thetas.to_vec(), times: times.to_vec(), populations, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_of(vals: Vec<Option<f64>>, n1: usize, n2: usize) -> Heatmap {
        Heatmap {
            axis1: Axis::new(SweepParam::Alpha1Pi, 0.0, 1.0, n1),
            axis2: Axis::new(SweepParam::Alpha2Pi, 0.0, 1.0, n2),
            targets: vec![DressedState::Plus],
            values: vec![vals],
            failures: Vec::new(),
        }
    }

    #[test]
    fn zero_areas_leave_the_ground_state() {
        let grid = SweepGrid {
            axis1: Axis::new(SweepParam::Alpha1Pi, 0.0, 0.0, 1),
            axis2: Axis::new(SweepParam::Alpha2Pi, 0.0, 0.0, 1),
            fixed: SystemConfig::default(),
            targets: vec![DressedState::G],
            t_end: 0.02,
        };
        let two = SweepGrid {
            axis1: Axis::new(SweepParam::Tau, 0.0, 0.001, 2),
            axis2: Axis::new(SweepParam::Theta, 0.0, 1.0, 2),
            fixed: SystemConfig { pulse: crate::drive::SuperPulseConfig::with_areas_pi(0.0, 0.0), ..SystemConfig::default() },
            ..grid.clone()
        };
        for g in [grid, two] {
            let map = run_heatmap(&g, &EvolveOptions::default()).unwrap();
            assert!(map.values[0].iter().all(|v| (v.unwrap() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn constant_map_picks_first_cell() {
        let b = best_cell(&map_of(vec![Some(0.5); 6], 2, 3), DressedState::Plus).unwrap();
        assert_eq!((b.i, b.j, b.ties), (0, 0, 5));
    }

    #[test]
    fn argmax_skips_missing_cells() {
        let b = best_cell(&map_of(vec![None, Some(0.1), Some(0.7), Some(0.7)], 2, 2), DressedState::Plus).unwrap();
        assert_eq!((b.i, b.j, b.value, b.ties), (1, 0, 0.7, 1));
        assert!(best_cell(&map_of(vec![None; 4], 2, 2), DressedState::Plus).is_err());
        assert!(best_cell(&map_of(vec![Some(0.1); 4], 2, 2), DressedState::X).is_err());
    }

    #[test]
    fn phase_grid_is_symmetric_and_contains_zero() {
        let g = phase_grid(21);
        assert_eq!(g.len(), 21);
        assert_eq!(g[10], 0.0);
        assert!(g.iter().all(|t| t.abs() < PI));
        assert!((g[0] + g[20]).abs() < 1e-15);
    }

    #[test]
    fn axis_nearest_and_endpoints() {
        let a = Axis::new(SweepParam::Alpha1Pi, 20.0, 100.0, 64);
        let v = a.values();
        assert_eq!((v[0], v[63]), (20.0, 100.0));
        assert_eq!(a.nearest(68.25), 38);
    }

    #[test]
    fn invalid_grid_reports_all_errors() {
        let grid = SweepGrid {
            axis1: Axis::new(SweepParam::Alpha1Pi, 2.0, 1.0, 3),
            axis2: Axis::new(SweepParam::Alpha2Pi, 0.0, 1.0, 0),
            fixed: SystemConfig::default(),
            targets: vec![],
            t_end: 0.02,
        };
        match grid.validate() {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 3),
            other => panic!("{other:?}"),
        }
    }
}
