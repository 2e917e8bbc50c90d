use alloc::vec;
use alloc::vec::Vec;

use super::{Permutation, SparseSymMatrix, NONE};
use crate::{Error, Result};

/// Symbolic Cholesky structure of `P Q Pᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicFactor {
    n: usize,
    /// Elimination tree; `NONE` marks a root.
    parent: Vec<usize>,
    col_ptr: Vec<usize>,
    /// Rows of `L`, ascending per column with the diagonal first.
    row_idx: Vec<usize>,
    perm: Option<Permutation>,
}

impl SymbolicFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn parent(&self) -> &[usize] {
        &self.parent
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn column_counts(&self) -> Vec<usize> {
        self.col_ptr.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    /// Whether `(i, j)`, `i ≥ j`, in the factor frame is in pattern(L).
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.find(i, j).is_some()
    }

    /// Storage offset of `(i, j)`, `i ≥ j`, in the factor frame.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        debug_assert!(i >= j);
        let start = self.col_ptr[j];
        self.column(j).binary_search(&i).ok().map(|p| start + p)
    }

    pub fn permutation(&self) -> Option<&Permutation> {
        self.perm.as_ref()
    }

    /// Factor-frame index of original index `i`.
    pub fn to_factor_frame(&self, i: usize) -> usize {
        self.perm.as_ref().map_or(i, |p| p.new_index(i))
    }

    /// Original index of factor-frame index `k`.
    pub fn to_original_frame(&self, k: usize) -> usize {
        self.perm.as_ref().map_or(k, |p| p.old_index(k))
    }
}

/// Nodes of row `k` of `L` (its nonzero columns `j < k`), written into
/// `stack[top..n]` in topological order. Returns `top`.
pub(super) fn ereach(
    k: usize,
    up_ptr: &[usize],
    up_idx: &[usize],
    parent: &[usize],
    flag: &mut [usize],
    stack: &mut [usize],
) -> usize {
    let n = stack.len();
    let mut top = n;
    flag[k] = k;
    for &i0 in &up_idx[up_ptr[k]..up_ptr[k + 1]] {
        if i0 >= k {
            continue;
        }
        let mut i = i0;
        let mut len = 0;
        while flag[i] != k {
            stack[len] = i;
            len += 1;
            flag[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

pub(super) fn elimination_tree(n: usize, up_ptr: &[usize], up_idx: &[usize]) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &i0 in &up_idx[up_ptr[k]..up_ptr[k + 1]] {
            let mut i = i0;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Elimination tree and full row pattern of `L` for `P Q Pᵀ`.
pub fn symbolic_factor(q: &SparseSymMatrix, perm: Option<&Permutation>) -> Result<SymbolicFactor> {
    let n = q.dim();
    for j in 0..n {
        if q.column(j).0.first() != Some(&j) {
            return Err(Error::StructurallySingular { column: j });
        }
    }
    let permuted;
    let c = match perm {
        Some(p) => {
            permuted = q.permuted(p)?;
            &permuted
        }
        None => q,
    };
    let (up_ptr, up_idx, _) = c.upper();
    let parent = elimination_tree(n, &up_ptr, &up_idx);

    let mut flag = vec![NONE; n];
    let mut stack = vec![0; n];
    let mut counts = vec![1usize; n];
    for k in 0..n {
        let top = ereach(k, &up_ptr, &up_idx, &parent, &mut flag, &mut stack);
        for &j in &stack[top..] {
            counts[j] += 1;
        }
    }
    let mut col_ptr = Vec::with_capacity(n + 1);
    col_ptr.push(0);
    for &cnt in &counts {
        col_ptr.push(col_ptr.last().unwrap() + cnt);
    }
    let mut row_idx = vec![0; col_ptr[n]];
    let mut next: Vec<usize> = col_ptr[..n].to_vec();
    flag.fill(NONE);
    for k in 0..n {
        let top = ereach(k, &up_ptr, &up_idx, &parent, &mut flag, &mut stack);
        for &j in &stack[top..] {
            row_idx[next[j]] = k;
            next[j] += 1;
        }
        row_idx[next[k]] = k;
        next[k] += 1;
    }
    Ok(SymbolicFactor { n, parent, col_ptr, row_idx, perm: perm.cloned() })
}
