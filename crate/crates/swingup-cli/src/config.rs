//! Run configuration: one JSON file in scaled units, with `_mev`, `_ps` and `_pi`
//! keys accepted as input-only aliases.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use swingup::collective::{DressedState, Geometry};
use swingup::disorder::{DisorderKind, DisorderSpec, EnsembleObservable};
use swingup::drive::{units, SuperPulseConfig};
use swingup::dynamics::{Basis, CavityConfig, EvolveOptions, SystemConfig};
use swingup::integrator::Options;
use swingup::observables::{QrtMode, SpectrumConfig};
use swingup::presets::T_END;
use swingup::sweep::{Axis, SweepGrid, SweepParam};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geom: Geometry,
    pub pulse: SuperPulseConfig,
    pub cavity: Option<CavityConfig>,
    pub basis: Basis,
    pub emitter_shifts: [f64; 2],
    /// Start of the integration; `None` starts six standard deviations before the pulses.
    pub t_start: Option<f64>,
    pub t_end: f64,
    pub n_points: usize,
    pub couplings: CouplingsSection,
    pub decay: DecaySection,
    pub sweep: SweepSection,
    pub phase_sweep: PhaseSweepSection,
    pub spectrum: SpectrumConfig,
    pub g2: G2Section,
    pub disorder: DisorderSection,
    pub integrator: IntegratorSection,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geom: Geometry::default(),
            pulse: SuperPulseConfig::default(),
            cavity: None,
            basis: Basis::default(),
            emitter_shifts: [0.0; 2],
            t_start: None,
            t_end: T_END,
            n_points: 201,
            couplings: CouplingsSection::default(),
            decay: DecaySection::default(),
            sweep: SweepSection::default(),
            phase_sweep: PhaseSweepSection::default(),
            spectrum: SpectrumConfig::default(),
            g2: G2Section::default(),
            disorder: DisorderSection::default(),
            integrator: IntegratorSection::default(),
            seed: 0,
            out_dir: None,
        }
    }
}

/// Separation grid for the coupling table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingsSection {
    pub d_min: f64,
    pub d_max: f64,
    pub n_points: usize,
    /// Logarithmic spacing.
    pub log: bool,
}

impl Default for CouplingsSection {
    fn default() -> Self {
        CouplingsSection { d_min: 0.005, d_max: 1.0, n_points: 200, log: true }
    }
}

impl CouplingsSection {
    pub fn values(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![self.d_min];
        }
        let n = (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|k| {
                let s = k as f64 / n;
                if self.log {
                    self.d_min * (self.d_max / self.d_min).powf(s)
                } else {
                    self.d_min + (self.d_max - self.d_min) * s
                }
            })
            .collect()
    }
}

/// Long-time run with exponential fits of the collective populations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecaySection {
    pub t_end: f64,
    pub n_points: usize,
    pub fit_start: f64,
    pub fit_end: f64,
}

impl Default for DecaySection {
    fn default() -> Self {
        DecaySection { t_end: 1.0, n_points: 201, fit_start: 0.05, fit_end: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub axis1: Axis,
    pub axis2: Axis,
    pub targets: Vec<DressedState>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            axis1: Axis::new(SweepParam::Alpha1Pi, 20.0, 100.0, 64),
            axis2: Axis::new(SweepParam::Alpha2Pi, 40.0, 120.0, 64),
            targets: vec![DressedState::Plus, DressedState::Minus, DressedState::X],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseSweepSection {
    /// Odd counts keep ϑ = 0 on the grid.
    pub n_phases: usize,
    pub n_times: usize,
}

impl Default for PhaseSweepSection {
    fn default() -> Self {
        PhaseSweepSection { n_phases: 21, n_times: 101 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct G2Section {
    /// Time of the first detection.
    pub tau_f: f64,
    pub tau_max: f64,
    pub n_tau: usize,
    pub mode: QrtMode,
}

impl Default for G2Section {
    fn default() -> Self {
        G2Section { tau_f: T_END, tau_max: 0.0, n_tau: 1, mode: QrtMode::TimeDependent }
    }
}

impl G2Section {
    pub fn delays(&self) -> Vec<f64> {
        if self.n_tau == 1 {
            return vec![0.0];
        }
        let h = self.tau_max / (self.n_tau - 1) as f64;
        (0..self.n_tau).map(|k| h * k as f64).collect()
    }
}

/// Ensemble parameters; the seed lives at the top level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderSection {
    pub kind: DisorderKind,
    pub width: f64,
    pub n_samples: usize,
    pub observables: Vec<EnsembleObservable>,
}

impl Default for DisorderSection {
    fn default() -> Self {
        DisorderSection {
            kind: DisorderKind::Position,
            width: 0.01,
            n_samples: 100,
            observables: vec![
                EnsembleObservable::Population { state: DressedState::Plus, t: T_END },
                EnsembleObservable::Population { state: DressedState::Minus, t: T_END },
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Check trace, Hermiticity and positivity at every output time.
    pub check_states: bool,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let o = Options::default();
        IntegratorSection { rtol: o.rtol, atol: o.atol, max_steps: o.max_steps, check_states: true }
    }
}

impl RunConfig {
    pub fn system(&self) -> SystemConfig {
        SystemConfig { geom: self.geom, pulse: self.pulse, cavity: self.cavity, basis: self.basis, emitter_shifts: self.emitter_shifts }
    }

    pub fn start_time(&self) -> f64 {
        self.t_start.unwrap_or_else(|| self.system().start_time())
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            integrator: Options { rtol: self.integrator.rtol, atol: self.integrator.atol, max_steps: self.integrator.max_steps },
            check_states: self.integrator.check_states,
            ..EvolveOptions::default()
        }
    }

    pub fn sweep_grid(&self) -> SweepGrid {
        SweepGrid {
            axis1: self.sweep.axis1,
            axis2: self.sweep.axis2,
            fixed: self.system(),
            targets: self.sweep.targets.clone(),
            t_end: self.t_end,
        }
    }

    pub fn disorder_spec(&self) -> DisorderSpec {
        DisorderSpec { kind: self.disorder.kind, width: self.disorder.width, n_samples: self.disorder.n_samples, seed: self.seed }
    }

    /// Every violated invariant, not just the first.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut errs = Vec::new();
        let absorb = |r: swingup::Result<()>, errs: &mut Vec<String>| match r {
            Err(swingup::Error::Validation(v)) => errs.extend(v),
            Err(e) => errs.push(e.to_string()),
            Ok(()) => {}
        };
        absorb(self.system().validate(), &mut errs);
        // Time checks need a valid pulse to place the start time.
        let timed = errs.is_empty();
        let t0 = self.start_time();
        if !t0.is_finite() {
            errs.push(format!("t_start must be finite (got {t0})"));
        }
        if timed && !(self.t_end.is_finite() && self.t_end > t0) {
            errs.push(format!("t_end must be finite and after the start time {t0} (got {})", self.t_end));
        }
        if self.n_points < 2 {
            errs.push(format!("n_points must be >= 2 (got {})", self.n_points));
        }
        let c = &self.couplings;
        if !(c.d_min.is_finite() && c.d_min > 0.0) {
            errs.push(format!("couplings.d_min must be positive (got {})", c.d_min));
        }
        if c.n_points == 0 {
            errs.push("couplings.n_points must be >= 1".into());
        } else if c.n_points > 1 && !(c.d_max > c.d_min) {
            errs.push(format!("couplings.d_max must exceed d_min (got {} <= {})", c.d_max, c.d_min));
        }
        let d = &self.decay;
        if timed && !(d.t_end.is_finite() && d.t_end > t0) {
            errs.push(format!("decay.t_end must follow the start time (got {})", d.t_end));
        }
        if d.n_points < 2 {
            errs.push(format!("decay.n_points must be >= 2 (got {})", d.n_points));
        }
        if !(d.fit_start < d.fit_end && d.fit_end <= d.t_end) {
            errs.push(format!("decay fit window [{}, {}] must be ordered and end by decay.t_end", d.fit_start, d.fit_end));
        }
        // The grid repeats the system errors listed above.
        if let (true, Err(swingup::Error::Validation(v))) = (timed, self.sweep_grid().validate()) {
            let fresh: Vec<String> = v.into_iter().filter(|e| !errs.contains(e)).map(|e| format!("sweep: {e}")).collect();
            errs.extend(fresh);
        }
        if self.phase_sweep.n_phases == 0 {
            errs.push("phase_sweep.n_phases must be >= 1".into());
        }
        if self.phase_sweep.n_times < 2 {
            errs.push(format!("phase_sweep.n_times must be >= 2 (got {})", self.phase_sweep.n_times));
        }
        let s = &self.spectrum;
        if !(s.window.is_finite() && s.window > 0.0) {
            errs.push(format!("spectrum.window must be positive (got {})", s.window));
        }
        if s.n_outer < 2 || s.inner_refine == 0 {
            errs.push("spectrum.n_outer must be >= 2 and spectrum.inner_refine >= 1".into());
        }
        if s.n_omega < 2 || !(s.omega_max > s.omega_min) {
            errs.push("spectrum needs n_omega >= 2 and omega_max > omega_min".into());
        }
        let g = &self.g2;
        if !g.tau_f.is_finite() {
            errs.push(format!("g2.tau_f must be finite (got {})", g.tau_f));
        }
        if g.n_tau == 0 || !(g.tau_max >= 0.0 && g.tau_max.is_finite()) || (g.n_tau > 1 && g.tau_max == 0.0) {
            errs.push("g2 needs n_tau >= 1 and a positive tau_max when n_tau > 1".into());
        }
        absorb(self.disorder_spec().validate(), &mut errs);
        if self.disorder.observables.is_empty() {
            errs.push("disorder.observables must not be empty".into());
        }
        let i = &self.integrator;
        if !(i.rtol > 0.0 && i.rtol < 1.0) {
            errs.push(format!("integrator.rtol must lie in (0, 1) (got {})", i.rtol));
        }
        if !(i.atol > 0.0) {
            errs.push(format!("integrator.atol must be positive (got {})", i.atol));
        }
        if i.max_steps == 0 {
            errs.push("integrator.max_steps must be >= 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(errs))
        }
    }

    /// Canonical serialisation in scaled units.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialise")
    }
}

type Conversion = fn(f64) -> f64;

const SUFFIXES: [(&str, Conversion); 3] =
    [("_mev", units::mev_to_scaled), ("_ps", units::ps_to_scaled), ("_pi", |x| x * PI)];

/// Rewrites suffixed keys to their scaled counterparts at every level.
/// Axis parameter names such as `alpha1_pi` are values and stay untouched.
fn resolve_units(v: &mut Value, path: &str, errs: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            let keys: Vec<String> = map.keys().cloned().collect();
            for k in keys {
                let Some((base, f)) = SUFFIXES.iter().find_map(|(s, f)| k.strip_suffix(s).map(|b| (b.to_string(), f))) else {
                    continue;
                };
                let here = join(path, &k);
                if map.contains_key(&base) {
                    errs.push(format!("{here} conflicts with {}", join(path, &base)));
                    continue;
                }
                match map[&k].as_f64() {
                    Some(x) => {
                        map.remove(&k);
                        map.insert(base, Value::from(f(x)));
                    }
                    None => errs.push(format!("{here} must be a number")),
                }
            }
            for (k, child) in map.iter_mut() {
                resolve_units(child, &join(path, k), errs);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter_mut().enumerate() {
                resolve_units(child, &format!("{path}[{i}]"), errs);
            }
        }
        _ => {}
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Applies `key.path=value`; the value is JSON when it parses, a string otherwise.
/// Setting a key removes its unit-suffixed siblings and vice versa.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Validation(vec![format!("override `{assignment}` must look like key.path=value")]))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Validation(vec![format!("override path `{path}` has an empty segment")]));
    }
    let mut node = doc;
    for p in &parts[..parts.len() - 1] {
        if !node.is_object() {
            return Err(CliError::Validation(vec![format!("override path `{path}` crosses a non-object")]));
        }
        let map = node.as_object_mut().expect("checked above");
        let entry = map.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
        if entry.is_null() {
            *entry = Value::Object(Map::new());
        }
        node = entry;
    }
    let map = node
        .as_object_mut()
        .ok_or_else(|| CliError::Validation(vec![format!("override path `{path}` crosses a non-object")]))?;
    let leaf = parts[parts.len() - 1];
    let base = SUFFIXES.iter().find_map(|(s, _)| leaf.strip_suffix(s)).unwrap_or(leaf);
    map.remove(base);
    for (s, _) in SUFFIXES {
        map.remove(&format!("{base}{s}"));
    }
    map.insert(leaf.to_string(), value);
    Ok(())
}

/// Reads a config document; an empty or whitespace-only file is `{}`.
pub fn read_document(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_document(&text)
}

pub fn parse_document(text: &str) -> Result<Value, CliError> {
    if text.trim().is_empty() {
        return Ok(Value::Object(Map::new()));
    }
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Validation(vec![format!("malformed JSON: {e}")]))?;
    if !v.is_object() {
        return Err(CliError::Validation(vec!["the configuration must be a JSON object".into()]));
    }
    Ok(v)
}

/// Resolves units and deserialises; unknown keys are rejected by name.
pub fn deserialize_document(mut doc: Value) -> Result<RunConfig, CliError> {
    let mut errs = Vec::new();
    resolve_units(&mut doc, "", &mut errs);
    if !errs.is_empty() {
        return Err(CliError::Validation(errs));
    }
    serde_json::from_value(doc).map_err(|e| CliError::Validation(vec![e.to_string()]))
}

pub fn from_document(doc: Value) -> Result<RunConfig, CliError> {
    let cfg = deserialize_document(doc)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_str(text: &str) -> Result<RunConfig, CliError> {
    from_document(parse_document(text)?)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    from_document(read_document(path)?)
}
