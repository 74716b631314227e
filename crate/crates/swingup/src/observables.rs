//! Derived observables: Bloch vectors of dressed two-level compressions, cavity
//! photon number, two-time correlators by the quantum regression theorem, the
//! cavity emission spectrum and the second-order photon correlation.

use serde::{Deserialize, Serialize};

use crate::collective::{DressedBasis, DressedState};
use crate::dynamics::{self, evolve_observable, propagate, uniform_grid, LindbladModel, Picture, Trajectory};
use crate::error::{Error, Result};
use crate::integrator::Options;
use crate::qalgebra::{expectation, trace_product, CMatrix, DensityMatrix, C64, ZERO};

/// Bloch vector of the `{|G⟩, |j⟩}` block of the emitter state, deliberately unnormalised.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub target: DressedState,
    pub components: [f64; 3],
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// `(2 Re ρ_{G,j}, 2 Im ρ_{G,j}, ρ_{j,j} − ρ_{G,G})` of a bare-basis emitter state.
pub fn bloch_vector(rho_e: &CMatrix, target: DressedState, basis: &DressedBasis) -> BlochVector {
    let gj = basis.element(rho_e, DressedState::G, target);
    let jj = basis.population(rho_e, target);
    let gg = basis.population(rho_e, DressedState::G);
    BlochVector { target, components: [2.0 * gj.re, 2.0 * gj.im, jj - gg] }
}

/// `⟨a†a⟩` at every stored time.
pub fn photon_number(model: &LindbladModel, traj: &Trajectory) -> Result<Vec<f64>> {
    let n = model
        .photon_number_op()
        .ok_or_else(|| Error::Precondition("photon number requires a cavity".into()))?;
    traj.states.iter().map(|r| expectation(&n, r).map(|c| c.re)).collect()
}

/// How the correlator treats a drive that is still on at the first time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QrtMode {
    /// Requires the drive to vanish from `t` on.
    #[default]
    PostPulse,
    /// Propagates with the full time-dependent generator.
    TimeDependent,
}

fn check_mode(model: &LindbladModel, t: f64, mode: QrtMode) -> Result<()> {
    if mode == QrtMode::PostPulse && !model.pulse.is_off() && model.pulse.window().1 > t {
        return Err(Error::Precondition(format!(
            "drive is still on after t = {t}; use the time-dependent mode"
        )));
    }
    Ok(())
}

/// `⟨A(t) B(t+τ)⟩ = Tr[B · e^{Lτ}(ρ(t) A)]` for every `τ` in `tau_grid` (ascending, ≥ 0).
pub fn qrt_correlator(
    model: &LindbladModel,
    rho_t: &DensityMatrix,
    t: f64,
    a: &CMatrix,
    b: &CMatrix,
    tau_grid: &[f64],
    mode: QrtMode,
    opts: &Options,
) -> Result<Vec<C64>> {
    check_mode(model, t, mode)?;
    let n = model.dim();
    if a.shape() != (n, n) || b.shape() != (n, n) {
        return Err(Error::Shape("correlator operators do not match the model".into()));
    }
    if tau_grid.iter().any(|&x| x < 0.0) {
        return Err(Error::Precondition("delays must be non-negative".into()));
    }
    let x0 = rho_t.matrix() * a;
    let lv = model.compile();
    let times: Vec<f64> = tau_grid.iter().map(|tau| t + tau).collect();
    let mut out = Vec::with_capacity(tau_grid.len());
    propagate(&lv, Picture::Schroedinger, &x0, t, &times, opts, |_, _, y| {
        out.push(trace_product(b, &dynamics::vec_to_matrix(y, n)));
        Ok(())
    })?;
    Ok(out)
}

/// Parameters of the emission-spectrum computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Start of the observation window; `None` starts where the drive switches off.
    pub t0: Option<f64>,
    /// Window length `T′`.
    pub window: f64,
    /// Outer time-grid size.
    pub n_outer: usize,
    /// Delay steps per outer step.
    pub inner_refine: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            t0: None,
            window: 0.6,
            n_outer: 512,
            inner_refine: 1,
            omega_min: -400.0,
            omega_max: 400.0,
            n_omega: 3201,
        }
    }
}

/// Normalised emission spectrum against `ω − Δc`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    pub window: (f64, f64),
    /// Most negative value relative to the peak before clipping.
    pub min_before_clip: f64,
    pub peak_raw: f64,
}

impl SpectrumResult {
    /// Local maxima above `threshold` (relative), refined by parabolic interpolation.
    pub fn peaks(&self, threshold: f64) -> Vec<(f64, f64)> {
        let v = &self.values;
        let f = &self.frequencies;
        let mut out = Vec::new();
        for i in 1..v.len().saturating_sub(1) {
            if v[i] >= threshold && v[i] > v[i - 1] && v[i] >= v[i + 1] {
                let (y0, y1, y2) = (v[i - 1], v[i], v[i + 1]);
                let den = y0 - 2.0 * y1 + y2;
                let shift = if den != 0.0 { 0.5 * (y0 - y2) / den } else { 0.0 };
                let h = f[i + 1] - f[i];
                out.push((f[i] + shift * h, y1 - 0.25 * (y0 - y2) * shift));
            }
        }
        out
    }
}

fn trapezoid(n: usize, h: f64) -> Vec<f64> {
    (0..n).map(|i| if n == 1 { 0.0 } else if i == 0 || i + 1 == n { 0.5 * h } else { h }).collect()
}

/// Two-sided emission spectrum `S(ν) = 2 Re ∫dt ∫dτ e^{−iντ} e^{−iΔcτ} ⟨a†(t) a(t+τ)⟩`
/// over the triangle `t₀ ≤ t`, `t + τ ≤ t₀ + T′`, normalised to unit peak.
///
/// Outer times after the drive window use one adjoint propagation of `a`;
/// earlier outer times are carried through the window with the time-dependent generator.
pub fn emission_spectrum(model: &LindbladModel, start_time: f64, cfg: &SpectrumConfig, opts: &Options) -> Result<SpectrumResult> {
    let a = model.a.as_ref().ok_or_else(|| Error::Precondition("spectrum requires a cavity".into()))?;
    if cfg.n_outer < 3 || cfg.inner_refine == 0 || cfg.n_omega < 3 || !(cfg.window > 0.0) {
        return Err(Error::Precondition("spectrum grid is degenerate".into()));
    }
    let a = a.matrix().clone();
    let ad = a.adjoint();
    let n = model.dim();
    let t0 = cfg.t0.unwrap_or_else(|| if model.pulse.is_off() { start_time } else { model.pulse.window().1.max(start_time) });
    let nt = cfg.n_outer;
    let m = cfg.inner_refine;
    let dt = cfg.window / (nt - 1) as f64;
    let h = dt / m as f64;
    let n_tau = (nt - 1) * m + 1;
    let outer = uniform_grid(t0, t0 + cfg.window, nt);
    let taus: Vec<f64> = (0..n_tau).map(|j| j as f64 * h).collect();

    if t0 < start_time {
        return Err(Error::Precondition("spectrum window starts before the preparation".into()));
    }
    let rho0 = DensityMatrix::ground(model.space().clone());
    let eopts = dynamics::EvolveOptions { integrator: *opts, ..Default::default() };
    let states = dynamics::evolve(model, &rho0, start_time, &outer, &eopts)?.states;

    // First outer index at which the drive has vanished for good.
    let w_end = if model.pulse.is_off() { f64::NEG_INFINITY } else { model.pulse.window().1 };
    let p = outer.iter().position(|&t| t >= w_end).unwrap_or(nt);

    // Heisenberg-evolved a over every delay, valid once the generator is time independent.
    let heis_start = outer.get(p).copied().unwrap_or(t0 + cfg.window);
    let a_tau = evolve_observable(model, &a, heis_start, &taus, opts)?;

    let lv = model.compile();
    let w_tau = |k: usize| trapezoid((nt - 1 - k) * m + 1, h);
    let w_t = trapezoid(nt, dt);

    // Row k holds C(t_k, τ_j) for every admissible j.
    let rows: Vec<Result<Vec<C64>>> = crate::par::map(nt, |k| {
        let jmax = (nt - 1 - k) * m;
        let x = states[k].matrix() * &ad;
        let mut row = vec![ZERO; jmax + 1];
        if k >= p {
            for (j, r) in row.iter_mut().enumerate() {
                *r = trace_product(&a_tau[j], &x);
            }
            return Ok(row);
        }
        let jp = (p - k) * m;
        let stops: Vec<f64> = (0..=jp.min(jmax)).map(|j| outer[k] + taus[j]).collect();
        let mut xp = None;
        propagate(&lv, Picture::Schroedinger, &x, outer[k], &stops, opts, |j, _, y| {
            let xm = dynamics::vec_to_matrix(y, n);
            row[j] = trace_product(&a, &xm);
            if j == jp {
                xp = Some(xm);
            }
            Ok(())
        })?;
        if let Some(xp) = xp {
            for j in jp + 1..=jmax {
                row[j] = trace_product(&a_tau[j - jp], &xp);
            }
        }
        Ok(row)
    });

    let delta_c = model_delta_c(model);
    let mut e = vec![ZERO; n_tau];
    for (k, row) in rows.into_iter().enumerate() {
        let row = row?;
        let wj = w_tau(k);
        for (j, c) in row.iter().enumerate() {
            e[j] += c * (w_t[k] * wj[j]);
        }
    }
    for (j, v) in e.iter_mut().enumerate() {
        *v *= C64::from_polar(1.0, -delta_c * taus[j]);
    }

    let freqs = uniform_grid(cfg.omega_min, cfg.omega_max, cfg.n_omega);
    let raw: Vec<f64> = freqs
        .iter()
        .map(|&nu| {
            let s: C64 = e.iter().zip(&taus).map(|(v, tau)| v * C64::from_polar(1.0, -nu * tau)).sum();
            2.0 * s.re
        })
        .collect();
    let peak = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Empty("spectrum has no positive weight".into()));
    }
    let min_rel = raw.iter().cloned().fold(f64::INFINITY, f64::min) / peak;
    let values = raw.iter().map(|v| (v / peak).max(0.0)).collect();
    Ok(SpectrumResult { frequencies: freqs, values, window: (t0, t0 + cfg.window), min_before_clip: min_rel, peak_raw: peak })
}

/// Largest local maximum of a spectrum on each side of zero detuning.
pub fn side_peaks(s: &SpectrumResult) -> (Option<(f64, f64)>, Option<(f64, f64)>) {
    let best = |pred: fn(f64) -> bool| s.peaks(0.0).into_iter().filter(|p| pred(p.0)).max_by(|a, b| a.1.total_cmp(&b.1));
    (best(|f| f < 0.0), best(|f| f > 0.0))
}

/// Refines the time grid by halving the outer step until no peak above half
/// maximum moves by more than `tol`, at most `max_doublings` times.
pub fn converged_spectrum(model: &LindbladModel, start_time: f64, cfg: &SpectrumConfig, opts: &Options, tol: f64, max_doublings: usize) -> Result<(SpectrumResult, f64, usize)> {
    let mut cfg = cfg.clone();
    let mut prev = emission_spectrum(model, start_time, &cfg, opts)?;
    let mut shift = f64::INFINITY;
    for k in 1..=max_doublings {
        cfg.n_outer = 2 * cfg.n_outer - 1;
        let next = emission_spectrum(model, start_time, &cfg, opts)?;
        let (a, b) = (prev.peaks(0.5), next.peaks(0.5));
        shift = if a.len() == b.len() {
            a.iter().zip(&b).map(|(x, y)| (x.0 - y.0).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        prev = next;
        if shift < tol {
            return Ok((prev, shift, k));
        }
    }
    Ok((prev, shift, max_doublings))
}

/// Cavity detuning recovered from the static Hamiltonian (`−Δc` per photon).
fn model_delta_c(model: &LindbladModel) -> f64 {
    let nf = model.space().n_fock().expect("cavity present") + 1;
    // ⟨G,1|H|G,1⟩ − ⟨G,0|H|G,0⟩ with |G⟩ at emitter index 3 in either basis.
    let h = model.h_static.matrix();
    let g0 = 3 * nf;
    -(h[(g0 + 1, g0 + 1)].re - h[(g0, g0)].re)
}

/// Second-order photon correlation after a first detection at `tau_f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Result {
    pub tau_f: f64,
    pub tau_t: Vec<f64>,
    pub values: Vec<f64>,
    pub masked: Vec<bool>,
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
}

impl G2Result {
    pub fn at_zero(&self) -> Option<f64> {
        (self.tau_t.first() == Some(&0.0) && !self.masked[0]).then(|| self.values[0])
    }
}

/// Denominators below this are masked.
pub const G2_FLOOR: f64 = 1e-12;

/// `g²(τ_f, τ) = ⟨a†(τ_f) a†(τ_f+τ) a(τ_f+τ) a(τ_f)⟩ / (⟨a†a⟩(τ_f) ⟨a†a⟩(τ_f+τ))`,
/// with `rho_f` the state at `tau_f`.
pub fn g2_function(model: &LindbladModel, rho_f: &DensityMatrix, tau_f: f64, tau_t: &[f64], mode: QrtMode, opts: &Options) -> Result<G2Result> {
    let a = model.a.as_ref().ok_or_else(|| Error::Precondition("g2 requires a cavity".into()))?.matrix().clone();
    check_mode(model, tau_f, mode)?;
    let ad = a.adjoint();
    let num_op = &ad * &a;
    // Doubly collapsed state a ρ a† propagated alongside ρ itself.
    let collapsed = &a * rho_f.matrix() * &ad;
    let n = model.dim();
    let lv = model.compile();
    let times: Vec<f64> = tau_t.iter().map(|x| tau_f + x).collect();
    let mut numerator = Vec::with_capacity(tau_t.len());
    propagate(&lv, Picture::Schroedinger, &collapsed, tau_f, &times, opts, |_, _, y| {
        numerator.push(trace_product(&num_op, &dynamics::vec_to_matrix(y, n)).re);
        Ok(())
    })?;
    let mut later = Vec::with_capacity(tau_t.len());
    propagate(&lv, Picture::Schroedinger, rho_f.matrix(), tau_f, &times, opts, |_, _, y| {
        later.push(trace_product(&num_op, &dynamics::vec_to_matrix(y, n)).re);
        Ok(())
    })?;
    let n_f = trace_product(&num_op, rho_f.matrix()).re;
    let denominator: Vec<f64> = later.iter().map(|x| n_f * x).collect();
    let masked: Vec<bool> = denominator.iter().map(|d| *d < G2_FLOOR).collect();
    let values = numerator
        .iter()
        .zip(&denominator)
        .zip(&masked)
        .map(|((nu, de), &m)| if m { f64::NAN } else { nu / de })
        .collect();
    Ok(G2Result { tau_f, tau_t: tau_t.to_vec(), values, masked, numerator, denominator })
}

/// `⟨a†a†aa⟩ / ⟨a†a⟩²` evaluated directly on one state.
pub fn g2_direct(model: &LindbladModel, rho: &DensityMatrix) -> Result<f64> {
    let a = model.a.as_ref().ok_or_else(|| Error::Precondition("g2 requires a cavity".into()))?.matrix();
    let ad = a.adjoint();
    let n = trace_product(&(&ad * a), rho.matrix()).re;
    let nn = trace_product(&(&ad * &ad * a * a), rho.matrix()).re;
    Ok(nn / (n * n))
}

/// Rate `r` of the least-squares fit `ln y = c − r t` over strictly positive samples.
pub fn exponential_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times.iter().zip(values).filter(|(_, v)| **v > 0.0).map(|(t, v)| (*t, v.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Empty("fewer than two positive samples to fit".into()));
    }
    let n = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + (t - mt) * (y - my), b + (t - mt) * (t - mt)));
    if sxx == 0.0 {
        return Err(Error::Precondition("fit times are all equal".into()));
    }
    Ok(-sxy / sxx)
}
