//! Tensor-product Hilbert spaces and dense complex operators.
//!
//! Subsystems are ordered (emitter 1, emitter 2, cavity). Each emitter uses the
//! local basis (|e⟩, |g⟩), so the bare two-emitter basis reads
//! {|e,e⟩, |e,g⟩, |g,e⟩, |g,g⟩}. The cavity uses Fock states |0⟩ … |n_fock⟩.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Ordered list of subsystem dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    factors: Vec<usize>,
}

impl HilbertSpace {
    /// Two emitters, no cavity.
    pub fn emitters() -> Self {
        HilbertSpace { factors: vec![2, 2] }
    }

    /// Two emitters and a cavity truncated above `n_fock` photons.
    pub fn with_cavity(n_fock: usize) -> Result<Self> {
        if n_fock == 0 {
            return Err(Error::domain("n_fock", "cavity cutoff must be at least 1"));
        }
        Ok(HilbertSpace { factors: vec![2, 2, n_fock + 1] })
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn has_cavity(&self) -> bool {
        self.factors.len() == 3
    }

    pub fn n_fock(&self) -> Option<usize> {
        self.factors.get(2).map(|d| d - 1)
    }

    /// Flat index of a product basis state given per-slot indices.
    pub fn index(&self, locals: &[usize]) -> usize {
        debug_assert_eq!(locals.len(), self.factors.len());
        locals
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&l, &d)| acc * d + l)
    }

    /// Per-slot indices of a flat basis index.
    pub fn locals(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, &d) in self.factors.iter().enumerate().rev() {
            out[slot] = flat % d;
            flat /= d;
        }
        out
    }
}

/// Dense operator tied to the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Shape(format!(
                "operator is {}x{} but the space has dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator { space, matrix })
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let n = space.dim();
        Operator { space: space.clone(), matrix: CMatrix::identity(n, n) }
    }

    pub fn zero(space: &HilbertSpace) -> Self {
        let n = space.dim();
        Operator { space: space.clone(), matrix: CMatrix::zeros(n, n) }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dagger(&self) -> Self {
        Operator { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator { space: self.space.clone(), matrix: &self.matrix * c }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.same_space(other)?;
        Ok(Operator { space: self.space.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.same_space(other)?;
        Ok(Operator { space: self.space.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn mul(&self, other: &Operator) -> Result<Self> {
        self.same_space(other)?;
        Ok(Operator { space: self.space.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Max-norm distance to the adjoint.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol
    }

    /// Change of basis `U† A U`, with `U` acting on the emitter factors only.
    pub fn conjugate_emitters(&self, u: &CMatrix) -> Result<Self> {
        let full = lift_emitter_matrix(u, &self.space)?;
        Ok(Operator { space: self.space.clone(), matrix: full.adjoint() * &self.matrix * full })
    }

    fn same_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Shape(format!(
                "operators act on {:?} and {:?}",
                self.space.factors, other.space.factors
            )));
        }
        Ok(())
    }
}

/// Density matrix; validity is checked on demand, not on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: CMatrix,
}

/// Tolerances for [`DensityMatrix::check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateTolerance {
    pub trace: f64,
    pub hermiticity: f64,
    pub positivity: f64,
}

impl Default for StateTolerance {
    fn default() -> Self {
        StateTolerance { trace: 1e-8, hermiticity: 1e-10, positivity: 1e-8 }
    }
}

impl DensityMatrix {
    pub fn from_matrix(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let op = Operator::new(space, matrix)?;
        Ok(DensityMatrix { space: op.space, matrix: op.matrix })
    }

    /// `|ψ⟩⟨ψ|` for a normalised copy of `psi`.
    pub fn pure(space: HilbertSpace, psi: &[C64]) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(Error::Shape(format!(
                "state vector has length {} but the space has dimension {}",
                psi.len(),
                space.dim()
            )));
        }
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::domain("psi", "state vector is zero"));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|c| c / norm));
        let matrix = &v * v.adjoint();
        Ok(DensityMatrix { space, matrix })
    }

    /// Product basis state given by per-slot indices.
    pub fn basis_state(space: HilbertSpace, locals: &[usize]) -> Result<Self> {
        if locals.len() != space.factors.len() || locals.iter().zip(&space.factors).any(|(l, d)| l >= d) {
            return Err(Error::Shape(format!("basis label {locals:?} does not fit {:?}", space.factors)));
        }
        let n = space.dim();
        let k = space.index(locals);
        let mut matrix = CMatrix::zeros(n, n);
        matrix[(k, k)] = ONE;
        Ok(DensityMatrix { space, matrix })
    }

    /// Both emitters in |g⟩ and, if present, the cavity in vacuum.
    pub fn ground(space: HilbertSpace) -> Self {
        let mut locals = vec![1, 1];
        if space.has_cavity() {
            locals.push(0);
        }
        DensityMatrix::basis_state(space, &locals).expect("ground label always fits")
    }

    /// Emitter state `rho_e` (4x4) tensored with cavity vacuum when the space has a cavity.
    pub fn from_emitter_state(space: HilbertSpace, rho_e: &CMatrix) -> Result<Self> {
        if rho_e.shape() != (4, 4) {
            return Err(Error::Shape("emitter state must be 4x4".into()));
        }
        let matrix = match space.n_fock() {
            None => rho_e.clone(),
            Some(nf) => {
                let mut vac = CMatrix::zeros(nf + 1, nf + 1);
                vac[(0, 0)] = ONE;
                rho_e.kronecker(&vac)
            }
        };
        DensityMatrix::from_matrix(space, matrix)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Returns the first violated invariant as an error stamped with `t`.
    pub fn check(&self, tol: &StateTolerance, t: f64) -> Result<()> {
        let tr = self.trace();
        let dev = (tr - ONE).norm();
        if dev > tol.trace {
            return Err(Error::Invariant { metric: "trace", value: dev, t });
        }
        let herm = self.hermiticity_error();
        if herm > tol.hermiticity {
            return Err(Error::Invariant { metric: "hermiticity", value: herm, t });
        }
        let min = self.min_eigenvalue();
        if min < -tol.positivity {
            return Err(Error::Invariant { metric: "positivity", value: min, t });
        }
        Ok(())
    }

    /// Reduced state on the emitter pair.
    pub fn emitters(&self) -> CMatrix {
        partial_trace(&self.matrix, &self.space, &[0, 1])
    }

    /// Reduced state on the cavity, if present.
    pub fn cavity(&self) -> Option<CMatrix> {
        self.space.has_cavity().then(|| partial_trace(&self.matrix, &self.space, &[2]))
    }
}

/// Emitter raising operator `|e⟩⟨g|` in the local (e, g) basis.
pub fn sigma_plus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

/// Emitter lowering operator `|g⟩⟨e|`.
pub fn sigma_minus() -> CMatrix {
    sigma_plus().adjoint()
}

/// Truncated bosonic annihilation operator with `√k` on the superdiagonal.
pub fn annihilation(n_fock: usize) -> Result<CMatrix> {
    if n_fock == 0 {
        return Err(Error::domain("n_fock", "cavity cutoff must be at least 1"));
    }
    let n = n_fock + 1;
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Identity-padded embedding of a local operator into `slot` of `space`.
pub fn embed(local: &CMatrix, slot: usize, space: &HilbertSpace) -> Result<Operator> {
    let d = *space
        .factors
        .get(slot)
        .ok_or_else(|| Error::Shape(format!("slot {slot} out of range for {:?}", space.factors)))?;
    if local.nrows() != d || local.ncols() != d {
        return Err(Error::Shape(format!(
            "local operator is {}x{} but slot {slot} has dimension {d}",
            local.nrows(),
            local.ncols()
        )));
    }
    let mut m = CMatrix::identity(1, 1);
    for (s, &ds) in space.factors.iter().enumerate() {
        m = if s == slot { m.kronecker(local) } else { m.kronecker(&CMatrix::identity(ds, ds)) };
    }
    Operator::new(space.clone(), m)
}

/// `Tr(op · rho)`.
pub fn expectation(op: &Operator, rho: &DensityMatrix) -> Result<C64> {
    if op.space != rho.space {
        return Err(Error::Shape(format!(
            "operator acts on {:?} but state lives on {:?}",
            op.space.factors, rho.space.factors
        )));
    }
    Ok(trace_product(&op.matrix, &rho.matrix))
}

/// `Tr(a · b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Reduced matrix on the slots listed in `keep` (ascending).
pub fn partial_trace(m: &CMatrix, space: &HilbertSpace, keep: &[usize]) -> CMatrix {
    let kept: Vec<usize> = keep.iter().map(|&s| space.factors[s]).collect();
    let dk: usize = kept.iter().product();
    let sub = |locals: &[usize]| keep.iter().zip(&kept).fold(0, |acc, (&s, &d)| acc * d + locals[s]);
    let traced: Vec<usize> = (0..space.factors.len()).filter(|s| !keep.contains(s)).collect();
    let n = space.dim();
    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..n {
        let li = space.locals(i);
        for j in 0..n {
            let lj = space.locals(j);
            if traced.iter().all(|&s| li[s] == lj[s]) {
                out[(sub(&li), sub(&lj))] += m[(i, j)];
            }
        }
    }
    out
}

/// Lifts a 4x4 emitter-pair matrix to the full space (identity on the cavity).
pub fn lift_emitter_matrix(u: &CMatrix, space: &HilbertSpace) -> Result<CMatrix> {
    if u.shape() != (4, 4) {
        return Err(Error::Shape("emitter-pair matrix must be 4x4".into()));
    }
    Ok(match space.n_fock() {
        None => u.clone(),
        Some(nf) => u.kronecker(&CMatrix::identity(nf + 1, nf + 1)),
    })
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
