//! Dense reference implementation of the second-order variance updates.
//!
//! Notation: `Ξ = Var(X)` is the state covariance, `A` the incidence matrix,
//! `Σ = A Ξ Aᵀ = Var(Y)`, `T = Var(E)` the observation-error variance and
//! `Σ* = Var(Y | Z)`. Every linear solve goes through a Cholesky factor of
//! the relevant positive definite matrix; no explicit inverse is formed on
//! the update path.

mod linalg;

use alloc::vec::Vec;

pub use linalg::{
    induced_norm, min_eigenvalue, psd_leq, symmetric_eigenvalues, Cholesky, DenseMatrix, NormKind,
    SINGULAR_RCOND,
};

use crate::diagnostics::UpdateDiagnostics;
use crate::{Error, Result};

const SYMMETRY_RTOL: f64 = 1e-12;

/// Symmetric dense matrix (a variance or precision matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix(DenseMatrix);

impl DenseSymMatrix {
    /// Validates squareness, finiteness and symmetry to relative `1e-12`,
    /// then stores the exactly symmetrized matrix.
    pub fn new(m: DenseMatrix) -> Result<Self> {
        let (r, c) = m.shape();
        if r != c {
            return Err(Error::DimensionMismatch { op: "DenseSymMatrix::new", expected: (r, r), found: (r, c) });
        }
        if !m.is_finite() {
            return Err(Error::NonFinite { what: "symmetric matrix" });
        }
        let tol = SYMMETRY_RTOL * m.max_abs();
        for i in 0..r {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > tol {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(DenseSymMatrix(m.symmetrized()))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(DenseMatrix::from_rows(rows)?)
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DenseMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 }))
    }

    pub fn identity(n: usize) -> Self {
        DenseSymMatrix(DenseMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_inner(self) -> DenseMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)] == 0.0))
    }

    /// Symmetrizes a product that is symmetric in exact arithmetic.
    fn from_product(m: DenseMatrix) -> Self {
        DenseSymMatrix(m.symmetrized())
    }
}

/// Dense incidence matrix `A` (m observations × n state components).
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    a: DenseMatrix,
    nonneg: bool,
}

impl IncidenceMatrix {
    pub fn new(a: DenseMatrix) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFinite { what: "incidence matrix" });
        }
        let nonneg = a.as_slice().iter().all(|&v| v >= 0.0);
        Ok(IncidenceMatrix { a, nonneg })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(DenseMatrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        IncidenceMatrix { a: DenseMatrix::identity(n), nonneg: true }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    /// Number of observations.
    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    /// State dimension.
    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }
}

/// Strictly increasing set of observation indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>, bound: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndexSet("indices must be strictly increasing"));
        }
        if indices.last().is_some_and(|&i| i >= bound) {
            return Err(Error::InvalidIndexSet("index out of bounds"));
        }
        Ok(IndexSet(indices))
    }

    pub fn full(m: usize) -> Self {
        IndexSet((0..m).collect())
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|i| other.0.binary_search(i).is_ok())
    }
}

fn check_square_pair(op: &'static str, a: &DenseSymMatrix, b: &DenseSymMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { op, expected: (a.dim(), a.dim()), found: (b.dim(), b.dim()) });
    }
    Ok(())
}

/// `Σ = A Ξ Aᵀ`.
pub fn prior_obs_variance(xi: &DenseSymMatrix, a: &IncidenceMatrix) -> Result<DenseSymMatrix> {
    if a.cols() != xi.dim() {
        return Err(Error::DimensionMismatch {
            op: "prior_obs_variance",
            expected: (a.rows(), xi.dim()),
            found: (a.rows(), a.cols()),
        });
    }
    let a_xi = a.matrix().matmul(xi.matrix())?;
    Ok(DenseSymMatrix::from_product(a_xi.matmul_transpose(a.matrix())?))
}

/// Joint update `Σ* = Σ − Σ (Σ + T)⁻¹ Σ`.
pub fn joint_update(sigma: &DenseSymMatrix, t: &DenseSymMatrix) -> Result<DenseSymMatrix> {
    check_square_pair("joint_update", sigma, t)?;
    let total = sigma.matrix().add(t.matrix())?;
    let chol = Cholesky::factor(&total, "Σ + T")?;
    let mut w = sigma.matrix().clone();
    chol.solve_in_place(&mut w);
    let correction = sigma.matrix().matmul(&w)?;
    Ok(DenseSymMatrix::from_product(sigma.matrix().sub(&correction)?))
}

/// `Var(Y | Z_B)` for all of `Y`, conditioning only on the observations in `b`:
/// `Σ − Σ_{:,B} (Σ_BB + T_BB)⁻¹ Σ_{B,:}`.
pub fn nested_update(sigma: &DenseSymMatrix, t: &DenseSymMatrix, b: &IndexSet) -> Result<DenseSymMatrix> {
    check_square_pair("nested_update", sigma, t)?;
    let m = sigma.dim();
    if b.indices().last().is_some_and(|&i| i >= m) {
        return Err(Error::InvalidIndexSet("index out of bounds"));
    }
    if b.is_empty() {
        return Ok(sigma.clone());
    }
    let idx = b.indices();
    let k = idx.len();
    let block = DenseMatrix::from_fn(k, k, |p, q| sigma.get(idx[p], idx[q]) + t.get(idx[p], idx[q]));
    let chol = Cholesky::factor(&block, "Σ_BB + T_BB")?;
    let sigma_b = DenseMatrix::from_fn(k, m, |p, j| sigma.get(idx[p], j));
    let mut w = sigma_b.clone();
    chol.solve_in_place(&mut w);
    let mut out = sigma.matrix().clone();
    for l in 0..k {
        let w_row = w.row(l);
        for i in 0..m {
            let s = sigma_b[(l, i)];
            if s == 0.0 {
                continue;
            }
            for (o, &wv) in out.row_mut(i).iter_mut().zip(w_row) {
                *o -= s * wv;
            }
        }
    }
    Ok(DenseSymMatrix::from_product(out))
}

/// Local update `Var(Yᵢ | Zᵢ) = Σᵢᵢ Tᵢᵢ / (Σᵢᵢ + Tᵢᵢ)`.
pub fn local_update(sigma_ii: f64, t_ii: f64) -> Result<f64> {
    if !(sigma_ii.is_finite() && sigma_ii >= 0.0) {
        return Err(Error::InvalidVariance { what: "prior variance", value: sigma_ii });
    }
    if !(t_ii.is_finite() && t_ii >= 0.0) {
        return Err(Error::InvalidVariance { what: "error variance", value: t_ii });
    }
    if sigma_ii + t_ii == 0.0 {
        return Err(Error::InvalidVariance { what: "prior + error variance", value: 0.0 });
    }
    Ok(sigma_ii * t_ii / (sigma_ii + t_ii))
}

/// Updated precision `Q* = Q + Aᵀ T⁻¹ A`.
pub fn updated_precision_dense(q: &DenseSymMatrix, a: &IncidenceMatrix, t: &DenseSymMatrix) -> Result<DenseSymMatrix> {
    if a.cols() != q.dim() || t.dim() != a.rows() {
        return Err(Error::DimensionMismatch {
            op: "updated_precision_dense",
            expected: (t.dim(), q.dim()),
            found: (a.rows(), a.cols()),
        });
    }
    if a.rows() == 0 {
        return Ok(q.clone());
    }
    let chol = Cholesky::factor(t.matrix(), "T")?;
    let mut tinv_a = a.matrix().clone();
    chol.solve_in_place(&mut tinv_a);
    let n = q.dim();
    let mut out = q.matrix().clone();
    for l in 0..a.rows() {
        let a_row = a.matrix().row(l);
        let x_row = tinv_a.row(l);
        for i in 0..n {
            let ali = a_row[i];
            if ali == 0.0 {
                continue;
            }
            for (o, &x) in out.row_mut(i).iter_mut().zip(x_row) {
                *o += ali * x;
            }
        }
    }
    Ok(DenseSymMatrix::from_product(out))
}

/// Inverse of a symmetric positive definite matrix, e.g. `Ξ = Q⁻¹`.
pub fn spd_inverse(m: &DenseSymMatrix, what: &'static str) -> Result<DenseSymMatrix> {
    Ok(DenseSymMatrix(Cholesky::factor(m.matrix(), what)?.inverse()))
}

/// Dense diagnostic pipeline: `Σ = A Ξ Aᵀ`, `Σ*` by [`joint_update`] and the
/// local updates, assembled into per-observation records.
pub fn dense_diagnostics(xi: &DenseSymMatrix, a: &IncidenceMatrix, t: &DenseSymMatrix) -> Result<UpdateDiagnostics> {
    let sigma = prior_obs_variance(xi, a)?;
    let joint = joint_update(&sigma, t)?;
    UpdateDiagnostics::from_vectors(&sigma.diagonal(), &t.diagonal(), &joint.diagonal())
}
