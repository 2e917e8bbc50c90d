use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    DiagonalNoise, OffPatternEntries, SparseCholeskyFactor, SparseIncidence, SparseSubsetInverse, SparseSymMatrix,
    SymbolicFactor,
};
use crate::{Error, Result};

fn require_nonneg(a: &SparseIncidence) -> Result<()> {
    match a.first_negative() {
        Some((row, col)) => Err(Error::NegativeIncidence { row, col }),
        None => Ok(()),
    }
}

/// Off-pattern positions `(row, col)`, `row > col`, in the factor frame,
/// where `[AᵀA]_jk ≠ 0`. These are the only entries of `Ξ` beyond the
/// sparse subset that `diag(A Ξ Aᵀ)` reads.
///
/// For non-negative `A`, `[AᵀA]_jk = 0` exactly when no row of `A` touches
/// both `j` and `k`, so the scan over row pairs is exact. A signed `A`
/// breaks that equivalence and is rejected.
///
/// The result is sorted by column descending, then row descending.
pub fn extra_entries_needed(a: &SparseIncidence, f: &SparseCholeskyFactor) -> Result<Vec<(usize, usize)>> {
    require_nonneg(a)?;
    let sym = f.symbolic();
    check_cols(a, sym.dim())?;
    let mut extra = BTreeSet::new();
    let mut frame: Vec<usize> = Vec::new();
    for i in 0..a.rows() {
        let (cols, _) = a.row(i);
        frame.clear();
        frame.extend(cols.iter().map(|&c| sym.to_factor_frame(c)));
        for (p, &x) in frame.iter().enumerate() {
            for &y in &frame[p + 1..] {
                let (r, c) = if x > y { (x, y) } else { (y, x) };
                if !sym.contains(r, c) {
                    extra.insert((c, r));
                }
            }
        }
    }
    Ok(extra.into_iter().rev().map(|(c, r)| (r, c)).collect())
}

fn check_cols(a: &SparseIncidence, n: usize) -> Result<()> {
    if a.cols() != n {
        return Err(Error::DimensionMismatch { op: "incidence", expected: (a.rows(), n), found: (a.rows(), a.cols()) });
    }
    Ok(())
}

/// `diag(A Ξ Aᵀ)ᵢ = Σ_j Σ_k A_ij A_ik Ξ_jk`, reading `Ξ` from the sparse
/// subset or, failing that, from `extras`.
pub fn obs_diag_variance(xi: &SparseSubsetInverse, extras: &OffPatternEntries, a: &SparseIncidence) -> Result<Vec<f64>> {
    let sym: &SymbolicFactor = xi.symbolic();
    check_cols(a, sym.dim())?;
    let mut out = Vec::with_capacity(a.rows());
    let mut frame: Vec<usize> = Vec::new();
    for i in 0..a.rows() {
        let (cols, vals) = a.row(i);
        frame.clear();
        frame.extend(cols.iter().map(|&c| sym.to_factor_frame(c)));
        let mut s = 0.0;
        for (p, (&x, &ax)) in frame.iter().zip(vals).enumerate() {
            let d = xi.get(x, x).expect("diagonal always in pattern");
            s += ax * ax * d;
            for (&y, &ay) in frame[p + 1..].iter().zip(&vals[p + 1..]) {
                let v = xi.get(x, y).or_else(|| extras.get(x, y)).ok_or_else(|| {
                    let (r, c) = if x > y { (x, y) } else { (y, x) };
                    Error::MissingInverseEntry { row: sym.to_original_frame(r), col: sym.to_original_frame(c) }
                })?;
                s += 2.0 * ax * ay * v;
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// `Q* = Q + Aᵀ T⁻¹ A` with diagonal `T`. The pattern is
/// `pattern(Q) ∪ pattern(AᵀA)`; every computed position is kept even when
/// its value cancels to zero.
pub fn updated_precision(q: &SparseSymMatrix, a: &SparseIncidence, t: &DiagonalNoise) -> Result<SparseSymMatrix> {
    let n = q.dim();
    check_cols(a, n)?;
    if t.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            op: "updated_precision",
            expected: (a.rows(), a.rows()),
            found: (t.len(), t.len()),
        });
    }
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..n {
        let (rows, vals) = q.column(j);
        cols[j].extend(rows.iter().copied().zip(vals.iter().copied()));
    }
    for (i, &tii) in t.variances().iter().enumerate() {
        let w = 1.0 / tii;
        let (acols, avals) = a.row(i);
        for (p, (&j, &aj)) in acols.iter().zip(avals).enumerate() {
            // column indices are ascending, so k ≥ j below
            for (&k, &ak) in acols[p..].iter().zip(&avals[p..]) {
                cols[j].push((k, aj * ak * w));
            }
        }
    }
    SparseSymMatrix::from_columns(n, cols)
}

#[cfg(test)]
mod tests {
    use super::super::{numeric_factor, symbolic_factor, takahashi_selected_inverse};
    use super::*;

    #[test]
    fn rank_one_update_by_hand() {
        let q = SparseSymMatrix::identity(2);
        let a = SparseIncidence::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let t = DiagonalNoise::new(alloc::vec![1.0]).unwrap();
        let qs = updated_precision(&q, &a, &t).unwrap();
        assert_eq!(qs.to_dense(), crate::dense::DenseSymMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap());
    }

    #[test]
    fn cancellation_keeps_pattern() {
        // Q has -1 at (1,0); the observation adds +1 there.
        let q = SparseSymMatrix::from_triplets(2, &[(0, 0, 2.0), (1, 0, -1.0), (1, 1, 2.0)]).unwrap();
        let a = SparseIncidence::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let t = DiagonalNoise::new(alloc::vec![1.0]).unwrap();
        let qs = updated_precision(&q, &a, &t).unwrap();
        assert_eq!(qs.get(1, 0), Some(0.0));
        assert_eq!(qs.nnz(), 3);
    }

    #[test]
    fn no_observations_is_identity_map() {
        let q = SparseSymMatrix::from_triplets(2, &[(0, 0, 2.0), (1, 0, -1.0), (1, 1, 2.0)]).unwrap();
        let a = SparseIncidence::from_triplets(0, 2, &[]).unwrap();
        let t = DiagonalNoise::new(alloc::vec![]).unwrap();
        assert_eq!(updated_precision(&q, &a, &t).unwrap(), q);
    }

    #[test]
    fn identity_rows_need_nothing_extra() {
        let q = SparseSymMatrix::identity(3);
        let f = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap();
        let a = SparseIncidence::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]).unwrap();
        assert!(extra_entries_needed(&a, &f).unwrap().is_empty());
        let xi = takahashi_selected_inverse(&f);
        assert_eq!(obs_diag_variance(&xi, &OffPatternEntries::new(), &a).unwrap(), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn negative_incidence_rejected() {
        let q = SparseSymMatrix::identity(2);
        let f = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap();
        let a = SparseIncidence::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, -1.0)]).unwrap();
        assert_eq!(extra_entries_needed(&a, &f).unwrap_err(), Error::NegativeIncidence { row: 0, col: 1 });
    }

    #[test]
    fn missing_entry_is_reported() {
        let q = SparseSymMatrix::identity(2);
        let f = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap();
        let xi = takahashi_selected_inverse(&f);
        let a = SparseIncidence::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(
            obs_diag_variance(&xi, &OffPatternEntries::new(), &a).unwrap_err(),
            Error::MissingInverseEntry { row: 1, col: 0 }
        );
    }
}
