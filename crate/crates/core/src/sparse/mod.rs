//! Sparse GMRF path.
//!
//! The state has sparse precision `Q = Ξ⁻¹`. The diagonal of `A Ξ Aᵀ` is
//! computed without forming `Ξ`: factor `P Q Pᵀ = L Lᵀ`, run the Takahashi
//! recursion to obtain `Ξ` on the pattern of `L` (the *sparse subset*), and
//! compute the few off-pattern entries that `A` touches on demand. The
//! updated covariance is handled the same way through `Q* = Q + Aᵀ T⁻¹ A`;
//! with non-negative `A` and diagonal `T` no off-pattern entries are ever
//! needed for it, which the pipeline asserts structurally.
//!
//! Positions inside a factor or selected inverse are in the permuted
//! (factor) frame. Public entry points taking original indices say so.

mod numeric;
mod ordering;
mod pipeline;
mod symbolic;
mod takahashi;
mod update;

use alloc::vec;
use alloc::vec::Vec;

pub use numeric::{numeric_factor, SparseCholeskyFactor};
pub use ordering::minimum_degree;
pub use pipeline::{
    run_sparse_pipeline, sparse_diagnostic_pipeline, Noise, ObservationSet, Ordering, PipelineStats, PrecisionModel,
};
pub use symbolic::{symbolic_factor, SymbolicFactor};
pub use takahashi::{off_pattern_inverse_entries, takahashi_selected_inverse, OffPatternEntries, SparseSubsetInverse};
pub use update::{extra_entries_needed, obs_diag_variance, updated_precision};

use crate::dense::{DenseMatrix, DenseSymMatrix, IncidenceMatrix};
use crate::{Error, Result};

pub(crate) const NONE: usize = usize::MAX;

/// Symmetric matrix stored as the compressed-column lower triangle.
///
/// Row indices are strictly increasing within each column and the diagonal
/// is the first stored entry of every column. Explicit zeros are part of
/// the pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn new(n: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if col_ptr.len() != n + 1 || col_ptr[0] != 0 || col_ptr[n] != row_idx.len() || row_idx.len() != values.len() {
            return Err(Error::InvalidMatrix("inconsistent compressed-column arrays"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "sparse symmetric matrix" });
        }
        for j in 0..n {
            let (start, end) = (col_ptr[j], col_ptr[j + 1]);
            if start > end {
                return Err(Error::InvalidMatrix("column pointers must be non-decreasing"));
            }
            if start == end || row_idx[start] != j {
                return Err(Error::StructurallySingular { column: j });
            }
            let rows = &row_idx[start..end];
            if rows.windows(2).any(|w| w[0] >= w[1]) || rows[rows.len() - 1] >= n {
                return Err(Error::InvalidMatrix("row indices must be strictly increasing and in range"));
            }
        }
        Ok(SparseSymMatrix { n, col_ptr, row_idx, values })
    }

    /// Builds from `(row, col, value)` triplets of either triangle; upper
    /// entries are mirrored into the lower triangle and duplicates summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(Error::InvalidMatrix("triplet index out of range"));
            }
            let (r, c) = if r >= c { (r, c) } else { (c, r) };
            cols[c].push((r, v));
        }
        Self::from_columns(n, cols)
    }

    /// Columns of `(row, value)` with `row ≥ column`, in any order.
    pub(crate) fn from_columns(n: usize, cols: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in cols {
            col.sort_by_key(|&(r, _)| r);
            for (r, v) in col {
                if row_idx.len() > *col_ptr.last().unwrap() && *row_idx.last().unwrap() == r {
                    *values.last_mut().unwrap() += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self::new(n, col_ptr, row_idx, values)
    }

    pub fn from_dense(m: &DenseSymMatrix) -> Result<Self> {
        let n = m.dim();
        let mut trip = Vec::new();
        for j in 0..n {
            for i in j..n {
                let v = m.get(i, j);
                if v != 0.0 || i == j {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &trip)
    }

    pub fn identity(n: usize) -> Self {
        SparseSymMatrix { n, col_ptr: (0..=n).collect(), row_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rows and values of lower column `j`.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    /// Stored value at `(i, j)` (either triangle), `None` off-pattern.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let (rows, vals) = self.column(c);
        rows.binary_search(&r).ok().map(|p| vals[p])
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_some()
    }

    pub fn to_dense(&self) -> DenseSymMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        DenseSymMatrix::new(m).expect("stored symmetric")
    }

    /// `C = P Q Pᵀ`, i.e. `C[new_i, new_j] = Q[perm[new_i], perm[new_j]]`.
    pub fn permuted(&self, perm: &Permutation) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidPermutation("length differs from matrix dimension"));
        }
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            let nj = perm.new_index(j);
            for (&i, &v) in rows.iter().zip(vals) {
                let ni = perm.new_index(i);
                let (r, c) = if ni >= nj { (ni, nj) } else { (nj, ni) };
                cols[c].push((r, v));
            }
        }
        Self::from_columns(self.n, cols)
    }

    /// Upper triangle in compressed-column form (equivalently, the lower
    /// triangle by rows): column `k` lists rows `i ≤ k`, ascending.
    pub(crate) fn upper(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        for &i in &self.row_idx {
            counts[i + 1] += 1;
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let ptr = counts.clone();
        let mut next = counts;
        let mut idx = vec![0; self.nnz()];
        let mut val = vec![0.0; self.nnz()];
        for j in 0..n {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                let p = next[i];
                next[i] += 1;
                idx[p] = j;
                val[p] = v;
            }
        }
        (ptr, idx, val)
    }
}

/// Sparse incidence matrix in compressed-row form. Explicitly stored zeros
/// are dropped at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseIncidence {
    m: usize,
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    nonneg: bool,
}

impl SparseIncidence {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// entries that are (or sum to) zero are dropped.
    pub fn from_triplets(m: usize, n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for &(r, c, v) in triplets {
            if r >= m || c >= n {
                return Err(Error::InvalidMatrix("triplet index out of range"));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "incidence matrix" });
            }
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(m + 1);
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let start = col_idx.len();
            for (c, v) in row {
                if col_idx.len() > start && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            let mut w = start;
            for p in start..col_idx.len() {
                if values[p] != 0.0 {
                    col_idx[w] = col_idx[p];
                    values[w] = values[p];
                    w += 1;
                }
            }
            col_idx.truncate(w);
            values.truncate(w);
            row_ptr.push(col_idx.len());
        }
        let nonneg = values.iter().all(|&v| v >= 0.0);
        Ok(SparseIncidence { m, n, row_ptr, col_idx, values, nonneg })
    }

    pub fn from_dense(a: &IncidenceMatrix) -> Result<Self> {
        let mut trip = Vec::new();
        for i in 0..a.rows() {
            for (j, &v) in a.matrix().row(i).iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.rows(), a.cols(), &trip)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Position of the first negative entry, if any.
    pub fn first_negative(&self) -> Option<(usize, usize)> {
        (0..self.m).find_map(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).find(|(_, &v)| v < 0.0).map(|(&j, _)| (i, j))
        })
    }

    pub fn to_dense(&self) -> IncidenceMatrix {
        let mut d = DenseMatrix::zeros(self.m, self.n);
        for i in 0..self.m {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        IncidenceMatrix::new(d).expect("finite by construction")
    }
}

/// Strictly positive observation-error variances (diagonal `T`).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalNoise(Vec<f64>);

impl DiagonalNoise {
    pub fn new(variances: Vec<f64>) -> Result<Self> {
        if let Some(&v) = variances.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidVariance { what: "observation-error variance", value: v });
        }
        Ok(DiagonalNoise(variances))
    }

    pub fn variances(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_dense(&self) -> DenseSymMatrix {
        DenseSymMatrix::from_diagonal(&self.0).expect("finite")
    }
}

/// Symmetric permutation. `perm[new] = old`, `inverse[old] = new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut inverse = vec![NONE; n];
        for (new, &old) in perm.iter().enumerate() {
            if old >= n {
                return Err(Error::InvalidPermutation("index out of range"));
            }
            if inverse[old] != NONE {
                return Err(Error::InvalidPermutation("repeated index"));
            }
            inverse[old] = new;
        }
        Ok(Permutation { perm, inverse })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { perm: (0..n).collect(), inverse: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn old_index(&self, new: usize) -> usize {
        self.perm[new]
    }

    pub fn new_index(&self, old: usize) -> usize {
        self.inverse[old]
    }
}
