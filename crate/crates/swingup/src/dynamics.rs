//! Rotating-frame Lindblad model of the emitter pair (and optional cavity) and its time evolution.
//!
//! Bare-basis Hamiltonian:
//!
//! ```text
//! H(t) = −Σᵢ (Δ₁ + δᵢ) σᵢ⁺σᵢ⁻ + Ω₁₂ (σ₁⁺σ₂⁻ + σ₂⁺σ₁⁻) − Δc a†a
//!        + g Σᵢ (e^{iφᵢ} σᵢ⁺ a + h.c.) − (f(t) S⁺ + f*(t) S⁻),   S⁺ = e^{iϑ} σ₁⁺ + σ₂⁺
//! ```
//!
//! with `f = f₁ + f₂` from [`crate::drive::drive_terms`]. Dissipation is the
//! collective emission with rate matrix `[[Γ, Γ₁₂], [Γ₁₂, Γ]]` plus cavity loss `κ D[a]`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::collective::{self, dressed_transform, mixture_matrix, DressedBasis, DressedState, Geometry};
use crate::drive::{self, SuperPulseConfig};
use crate::error::{Error, Result};
use crate::integrator::{Dop853, Options, Stats, System};
use crate::qalgebra::{
    annihilation, embed, lift_emitter_matrix, sigma_plus, CMatrix, DensityMatrix, HilbertSpace, Operator,
    StateTolerance, C64, I, ONE, ZERO,
};

/// Largest cutoff the convergence escalation will try.
pub const MAX_FOCK: usize = 11;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavityConfig {
    pub g: f64,
    pub kappa: f64,
    /// Cavity detuning; the mode enters the Hamiltonian as `−Δc a†a`.
    pub delta_c: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub n_fock: usize,
}

impl Default for CavityConfig {
    fn default() -> Self {
        CavityConfig { g: 100.0, kappa: 20.0, delta_c: -7595.58, phi1: 0.0, phi2: 0.0, n_fock: 5 }
    }
}

impl CavityConfig {
    pub(crate) fn collect_errors(&self, prefix: &str, errs: &mut Vec<String>) {
        if !(self.g.is_finite() && self.g > 0.0) {
            errs.push(format!("{prefix}.g must be positive (got {})", self.g));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            errs.push(format!("{prefix}.kappa must be non-negative (got {})", self.kappa));
        }
        if !self.delta_c.is_finite() {
            errs.push(format!("{prefix}.delta_c must be finite (got {})", self.delta_c));
        }
        for (name, v) in [("phi1", self.phi1), ("phi2", self.phi2)] {
            if !(v > -PI && v <= PI) {
                errs.push(format!("{prefix}.{name} must lie in (-pi, pi] (got {v})"));
            }
        }
        if !(2..=MAX_FOCK).contains(&self.n_fock) {
            errs.push(format!("{prefix}.n_fock must lie in [2, {MAX_FOCK}] (got {})", self.n_fock));
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    #[default]
    Bare,
    Dressed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub geom: Geometry,
    pub pulse: SuperPulseConfig,
    pub cavity: Option<CavityConfig>,
    pub basis: Basis,
    /// Static per-emitter detuning offsets added to Δ₁.
    pub emitter_shifts: [f64; 2],
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        self.geom.collect_errors("geom", &mut errs);
        self.pulse.collect_errors("pulse", &mut errs);
        if let Some(c) = &self.cavity {
            c.collect_errors("cavity", &mut errs);
        }
        for (i, s) in self.emitter_shifts.iter().enumerate() {
            if !s.is_finite() {
                errs.push(format!("emitter_shifts[{i}] must be finite (got {s})"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    pub fn space(&self) -> Result<HilbertSpace> {
        match &self.cavity {
            None => Ok(HilbertSpace::emitters()),
            Some(c) => HilbertSpace::with_cavity(c.n_fock),
        }
    }

    /// Start of the default integration interval: six standard deviations before the earliest pulse.
    pub fn start_time(&self) -> f64 {
        use crate::drive::Pulse;
        let s = self.pulse.std_dev(Pulse::First).max(self.pulse.std_dev(Pulse::Second));
        (-drive::SUPPORT_WIDTHS * s).min(self.pulse.window().0)
    }
}

/// A rate-weighted collapse operator.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseOp {
    pub rate: f64,
    pub op: Operator,
    pub label: &'static str,
}

/// Constant operators of the master equation; time dependence enters only through `f(t)`.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    pub basis: Basis,
    pub h_static: Operator,
    /// `R` in `H_drive(t) = −(f(t) R + f*(t) R†)`.
    pub drive_op: Operator,
    pub pulse: SuperPulseConfig,
    pub collapse: Vec<CollapseOp>,
    pub dressed: DressedBasis,
    /// Annihilation operator when a cavity is present.
    pub a: Option<Operator>,
}

impl LindbladModel {
    pub fn space(&self) -> &HilbertSpace {
        self.h_static.space()
    }

    pub fn dim(&self) -> usize {
        self.space().dim()
    }

    /// Full Hamiltonian at time `t`.
    pub fn hamiltonian(&self, t: f64) -> Operator {
        let f = drive::total_drive(&self.pulse, t);
        let m = self.h_static.matrix() - (self.drive_op.matrix() * f + self.drive_op.matrix().adjoint() * f.conj());
        Operator::new(self.space().clone(), m).expect("same space")
    }

    /// Projector onto a dressed state (identity on the cavity) in this model's basis.
    pub fn projector(&self, s: DressedState) -> Operator {
        let v = match self.basis {
            Basis::Bare => self.dressed.transform.column(s.index()).into_owned(),
            Basis::Dressed => {
                let mut e = nalgebra::DVector::<C64>::zeros(4);
                e[s.index()] = ONE;
                e
            }
        };
        let p = &v * v.adjoint();
        let m = lift_emitter_matrix(&p, self.space()).expect("4x4");
        Operator::new(self.space().clone(), m).expect("same space")
    }

    /// Emitter-pair state expressed in the bare basis.
    pub fn bare_emitter_state(&self, rho: &DensityMatrix) -> CMatrix {
        let e = rho.emitters();
        match self.basis {
            Basis::Bare => e,
            Basis::Dressed => &self.dressed.transform * e * self.dressed.transform.adjoint(),
        }
    }

    pub fn populations(&self, rho: &DensityMatrix) -> Populations {
        Populations::from_bare(&self.bare_emitter_state(rho), &self.dressed)
    }

    pub fn photon_number_op(&self) -> Option<Operator> {
        self.a.as_ref().map(|a| a.dagger().mul(a).expect("same space"))
    }

    /// Precomputed sparse form used by the integrator.
    pub fn compile(&self) -> Liouvillian {
        Liouvillian::new(self)
    }
}

/// `(σ₁⁺, σ₂⁺)` embedded in `space`.
fn raising_ops(space: &HilbertSpace) -> Result<(Operator, Operator)> {
    Ok((embed(&sigma_plus(), 0, space)?, embed(&sigma_plus(), 1, space)?))
}

/// Dressed-basis raising combination `(e^{iφ₁} σ₁⁺ + e^{iφ₂} σ₂⁺)` written with the ±-branch sums.
fn dressed_raising(phi1: f64, phi2: f64) -> CMatrix {
    let e1 = C64::from_polar(1.0, phi1);
    let e2 = C64::from_polar(1.0, phi2);
    let (x, g) = (DressedState::X.index(), DressedState::G.index());
    let mut m = CMatrix::zeros(4, 4);
    for (j, xi) in [(DressedState::Plus.index(), 1.0), (DressedState::Minus.index(), -1.0)] {
        m[(x, j)] += e1 + e2 * xi;
        m[(j, g)] += e1 * xi + e2;
    }
    m * C64::new(FRAC_1_SQRT_2, 0.0)
}

pub fn build_model(cfg: &SystemConfig) -> Result<LindbladModel> {
    cfg.validate()?;
    let space = cfg.space()?;
    let dressed = collective::dressed_basis(&cfg.geom, cfg.pulse.delta1)?;
    let n = space.dim();
    let lift = |m: &CMatrix| -> Result<Operator> { Operator::new(space.clone(), lift_emitter_matrix(m, &space)?) };

    let (s1, s2) = raising_ops(&space)?;
    let number = |s: &Operator| s.mul(&s.dagger());
    let shifts = number(&s1)?
        .scale(C64::new(-cfg.emitter_shifts[0], 0.0))
        .add(&number(&s2)?.scale(C64::new(-cfg.emitter_shifts[1], 0.0)))?;

    let u = dressed_transform();
    let u_full = lift_emitter_matrix(&u, &space)?;
    let to_model = |op: &Operator| -> Operator {
        match cfg.basis {
            Basis::Bare => op.clone(),
            Basis::Dressed => Operator::new(space.clone(), u_full.adjoint() * op.matrix() * &u_full).expect("same space"),
        }
    };

    let mut h_static = match cfg.basis {
        Basis::Bare => lift(&collective::dipole_hamiltonian(dressed.shift, cfg.pulse.delta1))?,
        Basis::Dressed => {
            let e = dressed.energies;
            let d = nalgebra::DVector::from_vec(vec![e.x, e.plus, e.minus, e.g].into_iter().map(|v| C64::new(v, 0.0)).collect());
            lift(&CMatrix::from_diagonal(&d))?
        }
    };
    h_static = h_static.add(&to_model(&shifts))?;

    let drive_op = match cfg.basis {
        Basis::Bare => s1.scale(C64::from_polar(1.0, cfg.pulse.theta)).add(&s2)?,
        // −f R = mixture_matrix(ϑ, √2 f)
        Basis::Dressed => lift(&(mixture_matrix(cfg.pulse.theta, ONE) * C64::new(-2f64.sqrt(), 0.0)))?,
    };

    let mut a_op = None;
    if let Some(c) = &cfg.cavity {
        let a = embed(&annihilation(c.n_fock)?, 2, &space)?;
        let n_op = a.dagger().mul(&a)?;
        h_static = h_static.add(&n_op.scale(C64::new(-c.delta_c, 0.0)))?;
        let raise = match cfg.basis {
            Basis::Bare => s1.scale(C64::from_polar(1.0, c.phi1)).add(&s2.scale(C64::from_polar(1.0, c.phi2)))?,
            Basis::Dressed => lift(&dressed_raising(c.phi1, c.phi2))?,
        };
        let coupling = raise.mul(&a)?.scale(C64::new(c.g, 0.0));
        h_static = h_static.add(&coupling)?.add(&coupling.dagger())?;
        a_op = Some(a);
    }
    debug_assert!(h_static.is_hermitian(1e-12 * (1.0 + crate::qalgebra::max_abs(h_static.matrix()))));

    // Rate matrix eigenvectors (1, ±1)/√2 with eigenvalues Γ ± Γ₁₂.
    let lower1 = s1.dagger();
    let lower2 = s2.dagger();
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let l_plus = lower1.add(&lower2)?.scale(h);
    let l_minus = lower2.sub(&lower1)?.scale(h);
    let mut collapse = vec![
        CollapseOp { rate: dressed.gamma_plus(), op: to_model(&l_plus), label: "collective_plus" },
        CollapseOp { rate: dressed.gamma_minus(), op: to_model(&l_minus), label: "collective_minus" },
    ];
    if let (Some(c), Some(a)) = (&cfg.cavity, &a_op) {
        collapse.push(CollapseOp { rate: c.kappa, op: a.clone(), label: "cavity" });
    }
    debug_assert_eq!(h_static.matrix().nrows(), n);

    Ok(LindbladModel { basis: cfg.basis, h_static, drive_op, pulse: cfg.pulse, collapse, dressed, a: a_op })
}

/// Sparse triplet list of a dense matrix.
#[derive(Clone, Debug, Default)]
struct Sparse(Vec<(usize, usize, C64)>);

impl Sparse {
    fn from_dense(m: &CMatrix) -> Self {
        let mut v = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let x = m[(i, j)];
                if x != ZERO {
                    v.push((i, j, x));
                }
            }
        }
        Sparse(v)
    }
}

/// Sparse compiled generator acting on row-major vectorised matrices.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    n: usize,
    /// `H₀ − (i/2) Σ γ L†L`
    k0: Sparse,
    r: Sparse,
    r_dag: Sparse,
    jumps: Vec<(f64, Sparse)>,
    pulse: SuperPulseConfig,
}

impl Liouvillian {
    fn new(model: &LindbladModel) -> Self {
        let n = model.dim();
        let mut k0 = model.h_static.matrix().clone();
        for c in &model.collapse {
            let m = c.op.matrix();
            k0 -= (m.adjoint() * m) * C64::new(0.0, 0.5 * c.rate);
        }
        let jumps = model
            .collapse
            .iter()
            .filter(|c| c.rate != 0.0)
            .map(|c| (c.rate, Sparse::from_dense(c.op.matrix())))
            .collect();
        Liouvillian {
            n,
            k0: Sparse::from_dense(&k0),
            r: Sparse::from_dense(model.drive_op.matrix()),
            r_dag: Sparse::from_dense(&model.drive_op.matrix().adjoint()),
            jumps,
            pulse: model.pulse,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `out += c·(S x)` with row-major `x`.
    #[inline]
    fn left(&self, s: &Sparse, c: C64, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        for &(i, k, v) in &s.0 {
            let cv = c * v;
            let (xr, or) = (&x[k * n..k * n + n], &mut out[i * n..i * n + n]);
            for (o, xv) in or.iter_mut().zip(xr) {
                *o += cv * xv;
            }
        }
    }

    /// `out += x·(c S)†` with row-major `x`.
    #[inline]
    fn right_dag(&self, s: &Sparse, c: C64, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        for &(j, k, v) in &s.0 {
            let cv = (c * v).conj();
            for i in 0..n {
                out[i * n + j] += x[i * n + k] * cv;
            }
        }
    }

    /// `out += x·(c S)` with row-major `x`.
    #[inline]
    fn right(&self, s: &Sparse, c: C64, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        for &(k, j, v) in &s.0 {
            let cv = c * v;
            for i in 0..n {
                out[i * n + j] += x[i * n + k] * cv;
            }
        }
    }

    fn drive(&self, t: f64) -> C64 {
        drive::total_drive(&self.pulse, t)
    }

    /// Schrödinger-picture generator `dρ/dt = −i(Kρ − ρK†) + Σ γ LρL†`.
    pub fn apply(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = ZERO);
        let f = self.drive(t);
        let mi = -I;
        self.left(&self.k0, mi, rho, out);
        self.right_dag(&self.k0, mi, rho, out);
        if f != ZERO {
            self.left(&self.r, mi * -f, rho, out);
            self.left(&self.r_dag, mi * -f.conj(), rho, out);
            self.right_dag(&self.r, mi * -f, rho, out);
            self.right_dag(&self.r_dag, mi * -f.conj(), rho, out);
        }
        let n = self.n;
        for (rate, l) in &self.jumps {
            for &(i, k, v) in &l.0 {
                for &(j, m, w) in &l.0 {
                    out[i * n + j] += rho[k * n + m] * (v * w.conj() * *rate);
                }
            }
        }
    }

    /// Heisenberg-picture generator `dA/dt = i(K†A − AK) + Σ γ L†AL`.
    pub fn apply_adjoint(&self, t: f64, a: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = ZERO);
        let n = self.n;
        let f = self.drive(t);
        // K†A: left multiply by the adjoint of each term.
        let mut terms: Vec<(&Sparse, C64)> = vec![(&self.k0, ONE)];
        if f != ZERO {
            terms.push((&self.r, -f));
            terms.push((&self.r_dag, -f.conj()));
        }
        for (s, c) in terms {
            for &(k, i, v) in &s.0 {
                // (c S)†[i][k] = conj(c v)
                let cv = I * (c * v).conj();
                for j in 0..n {
                    out[i * n + j] += cv * a[k * n + j];
                }
            }
            self.right(s, -I * c, a, out);
        }
        for (rate, l) in &self.jumps {
            for &(k, i, v) in &l.0 {
                for &(m, j, w) in &l.0 {
                    out[i * n + j] += a[k * n + m] * (v.conj() * w * *rate);
                }
            }
        }
    }
}

struct Forward<'a>(&'a Liouvillian);

impl System for Forward<'_> {
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.0.apply(t, y, dy)
    }
}

struct Adjoint<'a>(&'a Liouvillian);

impl System for Adjoint<'_> {
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.0.apply_adjoint(t, y, dy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub integrator: Options,
    /// Check state invariants at every output time.
    pub check_states: bool,
    pub state_tol: StateTolerance,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { integrator: Options::default(), check_states: true, state_tol: StateTolerance::default() }
    }
}

impl EvolveOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        let mut o = Self::default();
        o.integrator.rtol = rtol;
        o
    }
}

/// Output of [`evolve`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub stats: Stats,
}

impl Trajectory {
    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectories are never empty")
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectories are never empty")
    }
}

fn to_vec(m: &CMatrix) -> Vec<C64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            v.push(m[(i, j)]);
        }
    }
    v
}

fn from_vec(v: &[C64], n: usize) -> CMatrix {
    CMatrix::from_row_slice(n, n, v)
}

/// Which generator to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Picture {
    Schroedinger,
    Heisenberg,
}

/// Propagates an arbitrary matrix under the generator, visiting each time in `grid`.
///
/// Steps inside the pulse window are capped to resolve the two-color beat; the
/// integrator is restarted at the window edges.
pub fn propagate<F>(lv: &Liouvillian, picture: Picture, x0: &CMatrix, t0: f64, grid: &[f64], opts: &Options, mut visit: F) -> Result<Stats>
where
    F: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("output times must be strictly increasing".into()));
    }
    if grid.first().is_some_and(|&g| g < t0) {
        return Err(Error::Precondition(format!("output grid starts before t0 = {t0}")));
    }
    let n = lv.dim();
    let mut y = to_vec(x0);
    let mut ig = Dop853::new(n * n, *opts);
    let (w0, w1) = if lv.pulse.is_off() { (f64::INFINITY, f64::INFINITY) } else { lv.pulse.window() };
    let cap = lv.pulse.max_step_in_window();
    let t_end = grid.last().copied().unwrap_or(t0);

    let mut start = 0usize;
    if grid.first() == Some(&t0) {
        visit(0, t0, &y)?;
        start = 1;
    }
    let mut t = t0;
    let segments = [(w0, f64::INFINITY), (w1, cap), (f64::INFINITY, f64::INFINITY)];
    for (seg_end, h_max) in segments {
        if t >= t_end {
            break;
        }
        let seg_end = seg_end.min(t_end);
        if seg_end <= t {
            continue;
        }
        let mut idx = Vec::new();
        let mut stops = Vec::new();
        while start < grid.len() && grid[start] <= seg_end {
            idx.push(start);
            stops.push(grid[start]);
            start += 1;
        }
        let boundary = stops.last() != Some(&seg_end);
        if boundary {
            stops.push(seg_end);
        }
        ig.reset();
        let h_max = if t >= w0 && t < w1 { cap } else { h_max };
        let k = stops.len();
        match picture {
            Picture::Schroedinger => ig.integrate(&Forward(lv), t, &mut y, &stops, h_max, |i, tt, yy| {
                if i < idx.len() {
                    visit(idx[i], tt, yy)?;
                }
                debug_assert!(i < k);
                Ok(())
            })?,
            Picture::Heisenberg => ig.integrate(&Adjoint(lv), t, &mut y, &stops, h_max, |i, tt, yy| {
                if i < idx.len() {
                    visit(idx[i], tt, yy)?;
                }
                Ok(())
            })?,
        }
        t = seg_end;
    }
    Ok(ig.stats())
}

/// Integrates the master equation from `rho0` at `t0`, storing the state at every `grid` time.
pub fn evolve(model: &LindbladModel, rho0: &DensityMatrix, t0: f64, grid: &[f64], opts: &EvolveOptions) -> Result<Trajectory> {
    if rho0.space() != model.space() {
        return Err(Error::Shape("initial state and model live on different spaces".into()));
    }
    if grid.is_empty() {
        return Err(Error::Precondition("output grid is empty".into()));
    }
    let lv = model.compile();
    let n = model.dim();
    let space = model.space().clone();
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    let stats = propagate(&lv, Picture::Schroedinger, rho0.matrix(), t0, grid, &opts.integrator, |_, t, y| {
        let rho = DensityMatrix::from_matrix(space.clone(), from_vec(y, n))?;
        if opts.check_states {
            rho.check(&opts.state_tol, t)?;
        }
        times.push(t);
        states.push(rho);
        Ok(())
    })?;
    Ok(Trajectory { times, states, stats })
}

/// Adjoint evolution of an observable over `tau_grid` (time-independent generator only).
pub fn evolve_observable(model: &LindbladModel, a: &CMatrix, t_start: f64, tau_grid: &[f64], opts: &Options) -> Result<Vec<CMatrix>> {
    let lv = model.compile();
    let n = model.dim();
    let times: Vec<f64> = tau_grid.iter().map(|tau| t_start + tau).collect();
    let mut out = Vec::with_capacity(tau_grid.len());
    propagate(&lv, Picture::Heisenberg, a, t_start, &times, opts, |_, _, y| {
        out.push(from_vec(y, n));
        Ok(())
    })?;
    Ok(out)
}

pub(crate) fn vec_to_matrix(v: &[C64], n: usize) -> CMatrix {
    from_vec(v, n)
}

/// Populations of the four dressed states.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub g: f64,
    pub plus: f64,
    pub minus: f64,
    pub x: f64,
}

impl Populations {
    pub fn from_bare(rho_e: &CMatrix, basis: &DressedBasis) -> Self {
        Populations {
            g: basis.population(rho_e, DressedState::G),
            plus: basis.population(rho_e, DressedState::Plus),
            minus: basis.population(rho_e, DressedState::Minus),
            x: basis.population(rho_e, DressedState::X),
        }
    }

    pub fn get(&self, s: DressedState) -> f64 {
        match s {
            DressedState::G => self.g,
            DressedState::Plus => self.plus,
            DressedState::Minus => self.minus,
            DressedState::X => self.x,
        }
    }

    pub fn sum(&self) -> f64 {
        self.g + self.plus + self.minus + self.x
    }
}

/// Dressed populations at the last stored time.
pub fn final_populations(model: &LindbladModel, traj: &Trajectory) -> Populations {
    model.populations(traj.last())
}

/// Uniform grid of `n ≥ 2` points over `[t0, t1]`.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && t1 > t0);
    let h = (t1 - t0) / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { t1 } else { t0 + h * k as f64 }).collect()
}

/// Result of a run with automatic Fock-cutoff escalation.
#[derive(Clone, Debug)]
pub struct ConvergedRun {
    pub model: LindbladModel,
    pub trajectory: Trajectory,
    pub n_fock: Option<usize>,
    /// Largest photon-number change between the last two cutoffs.
    pub photon_change: f64,
    pub converged: bool,
}

/// Photon-number tolerance of the cutoff escalation.
pub const FOCK_TOLERANCE: f64 = 1e-3;

/// Runs from the ground state; with a cavity, raises the cutoff by two until the
/// photon number moves by less than [`FOCK_TOLERANCE`] or the cutoff reaches [`MAX_FOCK`].
pub fn simulate(cfg: &SystemConfig, t0: f64, grid: &[f64], opts: &EvolveOptions) -> Result<ConvergedRun> {
    let run = |c: &SystemConfig| -> Result<(LindbladModel, Trajectory)> {
        let model = build_model(c)?;
        let rho0 = DensityMatrix::ground(model.space().clone());
        let traj = evolve(&model, &rho0, t0, grid, opts)?;
        Ok((model, traj))
    };
    let Some(cav) = cfg.cavity else {
        let (model, trajectory) = run(cfg)?;
        return Ok(ConvergedRun { model, trajectory, n_fock: None, photon_change: 0.0, converged: true });
    };
    cfg.validate()?;
    let photons = |m: &LindbladModel, tr: &Trajectory| -> Vec<f64> {
        let n = m.photon_number_op().expect("cavity present");
        tr.states.iter().map(|r| crate::qalgebra::expectation(&n, r).expect("same space").re).collect()
    };
    let mut nf = cav.n_fock;
    let (mut model, mut traj) = run(cfg)?;
    let mut prev = photons(&model, &traj);
    let mut change = f64::INFINITY;
    while nf + 2 <= MAX_FOCK {
        nf += 2;
        let c = SystemConfig { cavity: Some(CavityConfig { n_fock: nf, ..cav }), ..*cfg };
        let (m2, t2) = run(&c)?;
        let next = photons(&m2, &t2);
        change = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        model = m2;
        traj = t2;
        prev = next;
        if change < FOCK_TOLERANCE {
            return Ok(ConvergedRun { model, trajectory: traj, n_fock: Some(nf), photon_change: change, converged: true });
        }
    }
    Ok(ConvergedRun { model, trajectory: traj, n_fock: Some(nf), photon_change: change, converged: change < FOCK_TOLERANCE })
}

/// Runs from the ground state at a fixed cutoff.
pub fn simulate_fixed(cfg: &SystemConfig, t0: f64, grid: &[f64], opts: &EvolveOptions) -> Result<(LindbladModel, Trajectory)> {
    let model = build_model(cfg)?;
    let rho0 = DensityMatrix::ground(model.space().clone());
    let traj = evolve(&model, &rho0, t0, grid, opts)?;
    Ok((model, traj))
}

/// Final dressed populations after the default preparation interval ending at `t_end`.
pub fn prepare(cfg: &SystemConfig, t_end: f64, opts: &EvolveOptions) -> Result<Populations> {
    let t0 = cfg.start_time();
    let (model, traj) = simulate_fixed(cfg, t0, &[t_end], opts)?;
    Ok(final_populations(&model, &traj))
}
