use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{SparseCholeskyFactor, SymbolicFactor, NONE};

/// Entries of `Ξ = Q⁻¹` on the pattern of `L` (the sparse subset), stored
/// aligned with the factor's lower-triangular structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSubsetInverse {
    symbolic: SymbolicFactor,
    values: Vec<f64>,
}

impl SparseSubsetInverse {
    pub fn symbolic(&self) -> &SymbolicFactor {
        &self.symbolic
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let cp = self.symbolic.col_ptr();
        (&self.symbolic.row_idx()[cp[j]..cp[j + 1]], &self.values[cp[j]..cp[j + 1]])
    }

    /// `Ξ_ij` in the factor frame, either triangle; `None` off-pattern.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.symbolic.find(r, c).map(|p| self.values[p])
    }

    /// `Ξ_ij` addressed by original indices.
    pub fn get_original(&self, i: usize, j: usize) -> Option<f64> {
        self.get(self.symbolic.to_factor_frame(i), self.symbolic.to_factor_frame(j))
    }

    /// Marginal variances `Ξ_ii` in original order.
    pub fn diagonal_original(&self) -> Vec<f64> {
        let cp = self.symbolic.col_ptr();
        (0..self.symbolic.dim()).map(|i| self.values[cp[self.symbolic.to_factor_frame(i)]]).collect()
    }
}

/// Takahashi recursion for the sparse subset of `Ξ`.
///
/// Columns are processed from `n − 1` down to `0`. For `i > j` in the
/// pattern of column `j`,
/// `Ξ_ij = −(1/L_jj) Σ_{k>j, L_kj≠0} L_kj Ξ_ik`, and
/// `Ξ_jj = 1/L_jj² − (1/L_jj) Σ_{k>j} L_kj Ξ_kj`.
/// Every `Ξ_ik` needed has `i, k` in the pattern of column `j`, so it lies in
/// the pattern of `L` in a later column and is already known.
pub fn takahashi_selected_inverse(f: &SparseCholeskyFactor) -> SparseSubsetInverse {
    let sym = f.symbolic();
    let n = sym.dim();
    let cp = sym.col_ptr();
    let ri = sym.row_idx();
    let lv = f.values();
    let mut xv = vec![0.0; lv.len()];
    // pos[r] = offset of row r within the off-diagonal part of the current column
    let mut pos = vec![NONE; n];
    let mut z: Vec<f64> = Vec::new();

    for j in (0..n).rev() {
        let start = cp[j] + 1;
        let end = cp[j + 1];
        let rows = &ri[start..end];
        let lcol = &lv[start..end];
        let ljj = lv[cp[j]];
        z.clear();
        z.resize(rows.len(), 0.0);
        for (a, &r) in rows.iter().enumerate() {
            pos[r] = a;
        }
        // z_i = Σ_k L_kj Ξ_ik over pattern pairs (i, k), each unordered pair
        // visited once while walking column k of Ξ.
        for (a, &k) in rows.iter().enumerate() {
            let lkj = lcol[a];
            for p in cp[k]..cp[k + 1] {
                let r = ri[p];
                let b = pos[r];
                if b == NONE {
                    continue;
                }
                let v = xv[p];
                z[b] += lkj * v;
                if r != k {
                    z[a] += lcol[b] * v;
                }
            }
        }
        let mut diag_sum = 0.0;
        for a in (0..rows.len()).rev() {
            let xij = -z[a] / ljj;
            xv[start + a] = xij;
            diag_sum += lcol[a] * xij;
        }
        xv[cp[j]] = (1.0 / ljj - diag_sum) / ljj;
        for &r in rows {
            pos[r] = NONE;
        }
    }
    SparseSubsetInverse { symbolic: sym.clone(), values: xv }
}

/// Entries of `Ξ` outside the sparse subset, keyed `(row, col)` with
/// `row > col` in the factor frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OffPatternEntries {
    map: BTreeMap<(usize, usize), f64>,
}

impl OffPatternEntries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i >= j { (i, j) } else { (j, i) };
        self.map.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Values at `positions`, in order. Positions must have been requested.
    pub fn values_at(&self, positions: &[(usize, usize)]) -> Vec<f64> {
        positions.iter().map(|&(i, j)| self.get(i, j).expect("requested position")).collect()
    }
}

/// Computes `Ξ_ij` for off-pattern positions (factor frame) by the same
/// recursion, memoizing every intermediate off-pattern entry it visits.
///
/// Each off-pattern `Ξ_ij` with `i > j` depends on `Ξ_ik` for `k` in the
/// pattern of column `j`, all in columns later than `j`, so the dependency
/// graph is acyclic; an explicit stack replaces call recursion.
/// Positions are best given column-major descending; any order is accepted.
pub fn off_pattern_inverse_entries(
    f: &SparseCholeskyFactor,
    xi: &SparseSubsetInverse,
    positions: &[(usize, usize)],
) -> OffPatternEntries {
    debug_assert_eq!(f.symbolic(), xi.symbolic());
    let mut out = OffPatternEntries::new();
    let lookup = |out: &OffPatternEntries, r: usize, c: usize| xi.get(r, c).or_else(|| out.get(r, c));
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for &(i0, j0) in positions {
        let key = if i0 >= j0 { (i0, j0) } else { (j0, i0) };
        if xi.get(key.0, key.1).is_some() || out.get(key.0, key.1).is_some() {
            continue;
        }
        stack.push(key);
        while let Some(&(i, j)) = stack.last() {
            if out.get(i, j).is_some() {
                stack.pop();
                continue;
            }
            let (rows, lvals) = f.column(j);
            let mut missing = false;
            for &k in &rows[1..] {
                let (r, c) = if i >= k { (i, k) } else { (k, i) };
                if lookup(&out, r, c).is_none() {
                    stack.push((r, c));
                    missing = true;
                }
            }
            if missing {
                continue;
            }
            let mut s = 0.0;
            for (&k, &lkj) in rows[1..].iter().zip(&lvals[1..]) {
                s += lkj * lookup(&out, i, k).expect("dependency resolved");
            }
            out.map.insert((i, j), -s / lvals[0]);
            stack.pop();
        }
    }
    out
}
