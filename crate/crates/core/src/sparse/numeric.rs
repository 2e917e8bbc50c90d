use alloc::vec;
use alloc::vec::Vec;

use super::symbolic::ereach;
use super::{SparseSymMatrix, SymbolicFactor, NONE};
use crate::dense::DenseMatrix;
use crate::{Error, Result};

/// Numeric Cholesky factor `P Q Pᵀ = L Lᵀ` on a fixed symbolic structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCholeskyFactor {
    symbolic: SymbolicFactor,
    values: Vec<f64>,
}

impl SparseCholeskyFactor {
    pub fn symbolic(&self) -> &SymbolicFactor {
        &self.symbolic
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.symbolic.dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Rows and values of column `j` of `L`, diagonal first.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let cp = self.symbolic.col_ptr();
        (&self.symbolic.row_idx()[cp[j]..cp[j + 1]], &self.values[cp[j]..cp[j + 1]])
    }

    pub fn diag(&self, j: usize) -> f64 {
        self.values[self.symbolic.col_ptr()[j]]
    }

    /// Dense copy of `L` (factor frame); intended for tests and small `n`.
    pub fn to_dense_l(&self) -> DenseMatrix {
        let n = self.dim();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                l[(i, j)] = v;
            }
        }
        l
    }
}

/// Up-looking Cholesky: row `k` of `L` is the solution of a sparse
/// triangular system whose pattern is the elimination-tree reach of
/// column `k` of the upper triangle.
pub fn numeric_factor(q: &SparseSymMatrix, sym: &SymbolicFactor) -> Result<SparseCholeskyFactor> {
    let n = sym.dim();
    if q.dim() != n {
        return Err(Error::DimensionMismatch { op: "numeric_factor", expected: (n, n), found: (q.dim(), q.dim()) });
    }
    let permuted;
    let c = match sym.permutation() {
        Some(p) => {
            permuted = q.permuted(p)?;
            &permuted
        }
        None => q,
    };
    let (up_ptr, up_idx, up_val) = c.upper();
    let col_ptr = sym.col_ptr();
    let row_idx = sym.row_idx();
    let parent = sym.parent();

    let mut values = vec![0.0; sym.nnz()];
    let mut next: Vec<usize> = col_ptr[..n].to_vec();
    let mut x = vec![0.0; n];
    let mut flag = vec![NONE; n];
    let mut stack = vec![0; n];

    for k in 0..n {
        let top = ereach(k, &up_ptr, &up_idx, parent, &mut flag, &mut stack);
        for p in up_ptr[k]..up_ptr[k + 1] {
            x[up_idx[p]] = up_val[p];
        }
        let mut d = x[k];
        x[k] = 0.0;
        for &j in &stack[top..] {
            let lkj = x[j] / values[col_ptr[j]];
            x[j] = 0.0;
            for p in col_ptr[j] + 1..next[j] {
                x[row_idx[p]] -= values[p] * lkj;
            }
            d -= lkj * lkj;
            let p = next[j];
            debug_assert_eq!(row_idx[p], k);
            values[p] = lkj;
            next[j] += 1;
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { column: k, original: sym.to_original_frame(k), pivot: d });
        }
        let p = next[k];
        debug_assert_eq!(row_idx[p], k);
        values[p] = libm::sqrt(d);
        next[k] += 1;
    }
    Ok(SparseCholeskyFactor { symbolic: sym.clone(), values })
}

#[cfg(test)]
mod tests {
    use super::super::symbolic_factor;
    use super::*;

    #[test]
    fn two_by_two_by_hand() {
        let q = SparseSymMatrix::from_triplets(2, &[(0, 0, 4.0), (1, 0, 2.0), (1, 1, 3.0)]).unwrap();
        let f = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap();
        let l = f.to_dense_l();
        assert_eq!(l[(0, 0)], 2.0);
        assert_eq!(l[(1, 0)], 1.0);
        assert_eq!(l[(0, 1)], 0.0);
        assert!((l[(1, 1)] - libm::sqrt(2.0)).abs() < 1e-15);
    }

    #[test]
    fn identity_factor_is_identity() {
        let q = SparseSymMatrix::identity(5);
        let f = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap();
        assert_eq!(f.to_dense_l(), DenseMatrix::identity(5));
    }

    #[test]
    fn indefinite_reports_column() {
        let q = SparseSymMatrix::from_triplets(3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (2, 1, 2.0)]).unwrap();
        let err = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { column: 2, original: 2, .. }));
    }
}
