//! Static disorder ensembles: jitter of the emitter positions along the
//! separation axis, or random on-site detuning offsets.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::collective::{collective_shift, DressedState, MIN_D_OVER_LAMBDA};
use crate::dynamics::{build_model, evolve, EvolveOptions, LindbladModel, SystemConfig};
use crate::error::{Error, Result};
use crate::observables::exponential_rate;
use crate::qalgebra::DensityMatrix;

/// Draws per sample before a non-positive separation becomes an error.
pub const MAX_RESAMPLES: u32 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderKind {
    /// Width is a fraction of the separation.
    Position,
    /// Width is a detuning in units of Γ.
    Energy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    pub width: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.width >= 0.0 && self.width.is_finite()) {
            errs.push(format!("disorder.width must be finite and >= 0 (got {})", self.width));
        }
        if self.n_samples == 0 {
            errs.push("disorder.n_samples must be >= 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Independent stream per sample index.
    fn rng(&self, sample_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(sample_index);
        rng
    }
}

/// One disordered configuration with the raw draws that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledConfig {
    pub config: SystemConfig,
    /// Position: axial offsets of the two emitters in units of λ. Energy: detuning offsets.
    pub draws: [f64; 2],
    /// Rejected draws before acceptance.
    pub resamples: u32,
}

pub fn sample_config(base: &SystemConfig, spec: &DisorderSpec, sample_index: u64) -> Result<SampledConfig> {
    spec.validate()?;
    let mut rng = spec.rng(sample_index);
    match spec.kind {
        DisorderKind::Position => {
            let d = base.geom.d_over_lambda;
            let normal = Normal::new(0.0, spec.width * d).map_err(|e| Error::domain("disorder.width", e.to_string()))?;
            for resamples in 0..=MAX_RESAMPLES {
                let draws = [normal.sample(&mut rng), normal.sample(&mut rng)];
                let sep = d + draws[1] - draws[0];
                if sep >= MIN_D_OVER_LAMBDA {
                    let mut config = *base;
                    config.geom.d_over_lambda = sep;
                    return Ok(SampledConfig { config, draws, resamples });
                }
            }
            Err(Error::domain("disorder.width", format!("no admissible separation after {MAX_RESAMPLES} redraws")))
        }
        DisorderKind::Energy => {
            let normal = Normal::new(0.0, spec.width).map_err(|e| Error::domain("disorder.width", e.to_string()))?;
            let draws = [normal.sample(&mut rng), normal.sample(&mut rng)];
            let mut config = *base;
            config.emitter_shifts = [base.emitter_shifts[0] + draws[0], base.emitter_shifts[1] + draws[1]];
            Ok(SampledConfig { config, draws, resamples: 0 })
        }
    }
}

pub fn sample_position_model(base: &SystemConfig, spec: &DisorderSpec, sample_index: u64) -> Result<LindbladModel> {
    if spec.kind != DisorderKind::Position {
        return Err(Error::Precondition("expected a position-disorder spec".into()));
    }
    build_model(&sample_config(base, spec, sample_index)?.config)
}

pub fn sample_energy_model(base: &SystemConfig, spec: &DisorderSpec, sample_index: u64) -> Result<LindbladModel> {
    if spec.kind != DisorderKind::Energy {
        return Err(Error::Precondition("expected an energy-disorder spec".into()));
    }
    build_model(&sample_config(base, spec, sample_index)?.config)
}

/// Per-sample quantity aggregated by [`run_ensemble`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EnsembleObservable {
    /// Dressed population at time `t`.
    Population { state: DressedState, t: f64 },
    /// Log-linear fit of a dressed population over `n_points` equidistant times.
    DecayRate { state: DressedState, t_start: f64, t_end: f64, n_points: usize },
    /// Sampled separation in units of λ.
    Separation,
    /// Sampled coherent coupling Ω₁₂.
    Coupling,
}

impl EnsembleObservable {
    pub fn label(&self) -> String {
        match self {
            EnsembleObservable::Population { state, t } => format!("P_{}({t})", state.label()),
            EnsembleObservable::DecayRate { state, .. } => format!("rate_{}", state.label()),
            EnsembleObservable::Separation => "d_over_lambda".into(),
            EnsembleObservable::Coupling => "omega12".into(),
        }
    }

    fn times(&self) -> Vec<f64> {
        match *self {
            EnsembleObservable::Population { t, .. } => vec![t],
            EnsembleObservable::DecayRate { t_start, t_end, n_points, .. } => {
                crate::dynamics::uniform_grid(t_start, t_end, n_points.max(2))
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: u64,
    pub draws: [f64; 2],
    pub resamples: u32,
    /// One value per requested observable; empty when the sample failed.
    pub values: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Statistic {
    pub fn from_values(v: &[f64]) -> Statistic {
        let n = v.len();
        if n == 0 {
            return Statistic { mean: f64::NAN, std_error: f64::NAN, n };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Statistic { mean, std_error, n }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub spec: DisorderSpec,
    pub observables: Vec<EnsembleObservable>,
    pub stats: Vec<Statistic>,
    pub samples: Vec<SampleRecord>,
    pub failures: usize,
    pub resamples: u64,
}

fn run_sample(base: &SystemConfig, spec: &DisorderSpec, index: u64, obs: &[EnsembleObservable], grid: &[f64], opts: &EvolveOptions) -> (SampleRecord, Result<Vec<f64>>) {
    let sampled = match sample_config(base, spec, index) {
        Ok(s) => s,
        Err(e) => {
            let rec = SampleRecord { index, draws: [f64::NAN; 2], resamples: MAX_RESAMPLES, values: Vec::new(), error: Some(e.to_string()) };
            return (rec, Err(e));
        }
    };
    let values = (|| -> Result<Vec<f64>> {
        let cfg = &sampled.config;
        let model = build_model(cfg)?;
        let pops = if grid.is_empty() {
            Vec::new()
        } else {
            let rho0 = DensityMatrix::ground(model.space().clone());
            let traj = evolve(&model, &rho0, cfg.start_time().min(grid[0]), grid, opts)?;
            traj.states.iter().map(|r| model.populations(r)).collect()
        };
        let at = |t: f64| grid.iter().position(|&g| g == t).expect("time collected into the grid");
        obs.iter()
            .map(|o| match *o {
                EnsembleObservable::Population { state, t } => Ok(pops[at(t)].get(state)),
                EnsembleObservable::DecayRate { state, .. } => {
                    let ts = o.times();
                    let ys: Vec<f64> = ts.iter().map(|&t| pops[at(t)].get(state)).collect();
                    exponential_rate(&ts, &ys)
                }
                EnsembleObservable::Separation => Ok(cfg.geom.d_over_lambda),
                EnsembleObservable::Coupling => collective_shift(&cfg.geom),
            })
            .collect()
    })();
    let rec = SampleRecord {
        index,
        draws: sampled.draws,
        resamples: sampled.resamples,
        values: values.as_ref().cloned().unwrap_or_default(),
        error: values.as_ref().err().map(|e| e.to_string()),
    };
    (rec, values)
}

/// Runs `spec.n_samples` independent disordered simulations and aggregates mean and standard error.
///
/// Failed samples are recorded and excluded from the statistics.
pub fn run_ensemble(base: &SystemConfig, spec: &DisorderSpec, observables: &[EnsembleObservable], opts: &EvolveOptions) -> Result<EnsembleResult> {
    spec.validate()?;
    base.validate()?;
    if observables.is_empty() {
        return Err(Error::Precondition("no observables requested".into()));
    }
    let mut grid: Vec<f64> = observables.iter().flat_map(|o| o.times()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.first().is_some_and(|&t| t < base.start_time()) {
        return Err(Error::Precondition("observation time precedes the start of the drive".into()));
    }
    let results = crate::par::map(spec.n_samples, |i| run_sample(base, spec, i as u64, observables, &grid, opts));
    let mut samples = Vec::with_capacity(results.len());
    let mut columns = vec![Vec::new(); observables.len()];
    let mut failures = 0;
    let mut first_error = None;
    for (rec, res) in results {
        match res {
            Ok(v) => v.iter().zip(columns.iter_mut()).for_each(|(x, c)| c.push(*x)),
            Err(e) => {
                failures += 1;
                first_error.get_or_insert(e);
            }
        }
        samples.push(rec);
    }
    if failures == spec.n_samples {
        return Err(first_error.expect("at least one failure"));
    }
    let resamples = samples.iter().map(|s| s.resamples as u64).sum();
    let stats = columns.iter().map(|c| Statistic::from_values(c)).collect();
    Ok(EnsembleResult { spec: *spec, observables: observables.to_vec(), stats, samples, failures, resamples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::Geometry;
    use crate::qalgebra::max_abs;

    fn spec(kind: DisorderKind, width: f64) -> DisorderSpec {
        DisorderSpec { kind, width, n_samples: 4, seed: 7 }
    }

    #[test]
    fn zero_width_reproduces_clean_model() {
        let base = SystemConfig::default();
        let clean = build_model(&base).unwrap();
        for kind in [DisorderKind::Position, DisorderKind::Energy] {
            let s = sample_config(&base, &spec(kind, 0.0), 3).unwrap();
            assert_eq!(s.config, base);
            let m = build_model(&s.config).unwrap();
            assert_eq!(max_abs(&(m.h_static.matrix() - clean.h_static.matrix())), 0.0);
        }
    }

    #[test]
    fn draws_depend_only_on_seed_and_index() {
        let base = SystemConfig::default();
        let sp = spec(DisorderKind::Position, 0.1);
        let a = sample_config(&base, &sp, 5).unwrap();
        let b = sample_config(&base, &sp, 5).unwrap();
        let c = sample_config(&base, &sp, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.draws, c.draws);
        let other = DisorderSpec { seed: 8, ..sp };
        assert_ne!(a.draws, sample_config(&base, &other, 5).unwrap().draws);
    }

    #[test]
    fn wide_position_disorder_resamples_and_stays_admissible() {
        let base = SystemConfig { geom: Geometry::perpendicular(0.01), ..SystemConfig::default() };
        let sp = spec(DisorderKind::Position, 1.5);
        let mut total = 0;
        for i in 0..200 {
            let s = sample_config(&base, &sp, i).unwrap();
            assert!(s.config.geom.d_over_lambda >= MIN_D_OVER_LAMBDA);
            total += s.resamples;
        }
        assert!(total > 0);
    }

    #[test]
    fn energy_disorder_leaves_dissipator_untouched() {
        let base = SystemConfig::default();
        let clean = build_model(&base).unwrap();
        for i in 0..5 {
            let m = sample_energy_model(&base, &spec(DisorderKind::Energy, 3.0), i).unwrap();
            for (a, b) in m.collapse.iter().zip(&clean.collapse) {
                assert_eq!(a.rate, b.rate);
                assert_eq!(max_abs(&(a.op.matrix() - b.op.matrix())), 0.0);
            }
        }
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let base = SystemConfig::default();
        assert!(sample_position_model(&base, &spec(DisorderKind::Energy, 0.1), 0).is_err());
        assert!(sample_energy_model(&base, &spec(DisorderKind::Position, 0.1), 0).is_err());
    }

    #[test]
    fn invalid_spec_lists_every_problem() {
        let bad = DisorderSpec { kind: DisorderKind::Energy, width: -1.0, n_samples: 0, seed: 0 };
        match bad.validate() {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn standard_error_of_constant_is_zero() {
        let s = Statistic::from_values(&[0.3; 5]);
        assert_eq!((s.mean, s.std_error, s.n), (0.3, 0.0, 5));
    }
}
