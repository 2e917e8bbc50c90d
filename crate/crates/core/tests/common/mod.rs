#![allow(dead_code)]

use medalplot_core::dense::{DenseMatrix, DenseSymMatrix, IncidenceMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn sym_from_na(m: &DMatrix<f64>) -> DenseSymMatrix {
    let s = (m + m.transpose()) * 0.5;
    DenseSymMatrix::new(from_na(&s)).unwrap()
}

/// `B Bᵀ + δ I` scaled by `scale`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let delta = rng.gen_range(0.05..1.0);
    (&b * b.transpose() + DMatrix::identity(n, n) * delta) * scale
}

/// Random incidence with some duplicated rows so `A Ξ Aᵀ` may be singular.
pub fn random_incidence(rng: &mut ChaCha8Rng, m: usize, n: usize, duplicate: bool) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(m, n, |_, _| if rng.gen_bool(0.5) { rng.gen_range(-1.0..1.0) } else { 0.0 });
    for i in 0..m {
        if a.row(i).iter().all(|&v| v == 0.0) {
            a[(i, rng.gen_range(0..n))] = 1.0;
        }
    }
    if duplicate && m >= 2 {
        let src = rng.gen_range(0..m);
        let dst = (src + 1 + rng.gen_range(0..m - 1)) % m;
        let row = a.row(src).clone_owned();
        a.set_row(dst, &row);
    }
    a
}

pub fn incidence_from_na(a: &DMatrix<f64>) -> IncidenceMatrix {
    IncidenceMatrix::new(from_na(a)).unwrap()
}

/// `Σ − Σ (Σ + T)⁻¹ Σ` through a full LU inverse.
pub fn joint_oracle(sigma: &DMatrix<f64>, t: &DMatrix<f64>) -> DMatrix<f64> {
    let inv = (sigma + t).try_inverse().expect("Σ + T invertible");
    sigma - sigma * inv * sigma
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().min()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}
