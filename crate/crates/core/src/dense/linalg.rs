//! Small dense kernels: row-major matrix, Cholesky, Jacobi eigenvalues, norms.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::{Error, Result};

/// Reciprocal condition estimates below this are treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-13;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "DenseMatrix::from_vec",
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidMatrix("ragged rows"));
            }
            data.extend_from_slice(r);
        }
        Ok(DenseMatrix { rows: rows.len(), cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `(M + Mᵀ)/2`; requires a square matrix.
    pub fn symmetrized(&self) -> Self {
        debug_assert_eq!(self.rows, self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                expected: (self.cols, rhs.cols),
                found: rhs.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · rhsᵀ`, using contiguous row dot products.
    pub fn matmul_transpose(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                op: "matmul_transpose",
                expected: (rhs.rows, self.cols),
                found: rhs.shape(),
            });
        }
        Ok(Self::from_fn(self.rows, rhs.rows, |i, j| dot(self.row(i), rhs.row(j))))
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    fn zip_with(&self, rhs: &DenseMatrix, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch { op, expected: self.shape(), found: rhs.shape() });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(DenseMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense Cholesky factor `A = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
    rcond: f64,
}

impl Cholesky {
    /// Factors `a`. Fails with [`Error::Singular`] on a non-positive pivot or
    /// when the estimate `(min Lᵢᵢ / max Lᵢᵢ)²` falls below [`SINGULAR_RCOND`].
    pub fn factor(a: &DenseMatrix, what: &'static str) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch { op: "cholesky", expected: (n, n), found: a.shape() });
        }
        let mut l = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let s = a[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::Singular { what, rcond: 0.0 });
                    }
                    l[(i, i)] = libm::sqrt(s);
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        let (lo, hi) = (0..n).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
            let d = l[(i, i)];
            (lo.min(d), hi.max(d))
        });
        let rcond = if n == 0 { 1.0 } else { (lo / hi) * (lo / hi) };
        if rcond < SINGULAR_RCOND {
            return Err(Error::Singular { what, rcond });
        }
        Ok(Cholesky { l, rcond })
    }

    pub fn factor_matrix(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Overwrites every column of `b` (n×k) with the solution of `A x = b`.
    pub fn solve_in_place(&self, b: &mut DenseMatrix) {
        let n = self.dim();
        assert_eq!(b.rows(), n, "right-hand side row count");
        let k = b.cols();
        let mut tmp = vec![0.0; k];
        // forward: L y = b
        for i in 0..n {
            tmp.copy_from_slice(b.row(i));
            for (p, &lip) in self.l.row(i)[..i].iter().enumerate() {
                if lip == 0.0 {
                    continue;
                }
                for (t, &y) in tmp.iter_mut().zip(b.row(p)) {
                    *t -= lip * y;
                }
            }
            let d = self.l[(i, i)];
            for (dst, t) in b.row_mut(i).iter_mut().zip(&tmp) {
                *dst = t / d;
            }
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            tmp.copy_from_slice(b.row(i));
            for p in i + 1..n {
                let lpi = self.l[(p, i)];
                if lpi == 0.0 {
                    continue;
                }
                for (t, &x) in tmp.iter_mut().zip(b.row(p)) {
                    *t -= lpi * x;
                }
            }
            let d = self.l[(i, i)];
            for (dst, t) in b.row_mut(i).iter_mut().zip(&tmp) {
                *dst = t / d;
            }
        }
    }

    pub fn inverse(&self) -> DenseMatrix {
        let mut x = DenseMatrix::identity(self.dim());
        self.solve_in_place(&mut x);
        x.symmetrized()
    }
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
/// Only the lower triangle is trusted; the input is symmetrized first.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "eigenvalues need a square matrix");
    let mut a = m.symmetrized();
    let total = a.frobenius();
    if total == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if libm::sqrt(2.0 * off) <= 1e-15 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (theta.abs() + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig = a.diagonal();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Smallest eigenvalue of `(M + Mᵀ)/2`.
pub fn min_eigenvalue(m: &DenseMatrix) -> f64 {
    symmetric_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// `a ≤ b` in the non-negative-definite order, up to `eps`.
pub fn psd_leq(a: &DenseMatrix, b: &DenseMatrix, eps: f64) -> Result<bool> {
    Ok(min_eigenvalue(&b.sub(a)?) >= -eps)
}

/// Induced matrix norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormKind {
    /// Maximum absolute column sum.
    One,
    /// Largest singular value.
    #[default]
    Two,
    /// Maximum absolute row sum.
    Inf,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::One => "1",
            NormKind::Two => "2",
            NormKind::Inf => "inf",
        }
    }
}

pub fn induced_norm(m: &DenseMatrix, kind: NormKind) -> f64 {
    match kind {
        NormKind::One => (0..m.cols())
            .map(|j| (0..m.rows()).map(|i| m[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::Inf => (0..m.rows())
            .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::Two => {
            let gram = m.transpose().matmul(m).expect("conforming");
            let top = symmetric_eigenvalues(&gram).last().copied().unwrap_or(0.0);
            libm::sqrt(top.max(0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_two_by_two() {
        let a = DenseMatrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]).unwrap();
        let c = Cholesky::factor(&a, "a").unwrap();
        let l = c.factor_matrix();
        assert_eq!(l[(0, 0)], 2.0);
        assert_eq!(l[(1, 0)], 1.0);
        assert!((l[(1, 1)] - libm::sqrt(2.0)).abs() < 1e-15);
        let mut b = DenseMatrix::from_rows(&[[8.0], [7.0]]).unwrap();
        c.solve_in_place(&mut b);
        // 4x + 2y = 8, 2x + 3y = 7  =>  x = 1.25, y = 1.5
        assert!((b[(0, 0)] - 1.25).abs() < 1e-14);
        assert!((b[(1, 0)] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let a = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(Cholesky::factor(&a, "a"), Err(Error::Singular { .. })));
    }

    #[test]
    fn jacobi_known_spectrum() {
        let a = DenseMatrix::from_rows(&[[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]).unwrap();
        let e = symmetric_eigenvalues(&a);
        let s2 = libm::sqrt(2.0);
        for (got, want) in e.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn norms_of_small_matrix() {
        let m = DenseMatrix::from_rows(&[[1.0, -2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(induced_norm(&m, NormKind::One), 6.0);
        assert_eq!(induced_norm(&m, NormKind::Inf), 7.0);
        // singular values of [[1,-2],[3,4]]: sqrt(15 ± sqrt(125))
        let want = libm::sqrt(15.0 + libm::sqrt(125.0));
        assert!((induced_norm(&m, NormKind::Two) - want).abs() < 1e-12);
    }
}
