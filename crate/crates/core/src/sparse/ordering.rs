use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{Permutation, SparseSymMatrix};

/// Minimum-degree fill-reducing ordering on the quotient graph.
///
/// Eliminated nodes become elements; a variable's degree is the exact size
/// of its reachable set through variables and elements. Elements adjacent to
/// the pivot are absorbed into the new element. Ties are broken by the
/// smaller index, so the ordering is deterministic.
pub fn minimum_degree(q: &SparseSymMatrix) -> Permutation {
    let n = q.dim();
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        for &i in q.column(j).0 {
            if i != j {
                var_adj[i].push(j);
                var_adj[j].push(i);
            }
        }
    }
    let mut elem_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut elem_vars: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut absorbed = vec![false; n];
    let mut eliminated = vec![false; n];
    let mut degree: Vec<usize> = var_adj.iter().map(Vec::len).collect();
    let mut queue: BTreeSet<(usize, usize)> = degree.iter().copied().zip(0..n).collect();
    let mut mark = vec![0usize; n];
    let mut stamp = 0usize;
    let mut order = Vec::with_capacity(n);

    while let Some((_, p)) = queue.pop_first() {
        eliminated[p] = true;
        order.push(p);

        stamp += 1;
        mark[p] = stamp;
        let mut lp = Vec::new();
        for &v in &var_adj[p] {
            if !eliminated[v] && mark[v] != stamp {
                mark[v] = stamp;
                lp.push(v);
            }
        }
        for e in core::mem::take(&mut elem_adj[p]) {
            if absorbed[e] {
                continue;
            }
            for &v in &elem_vars[e] {
                if !eliminated[v] && mark[v] != stamp {
                    mark[v] = stamp;
                    lp.push(v);
                }
            }
            absorbed[e] = true;
            elem_vars[e] = Vec::new();
        }
        var_adj[p] = Vec::new();
        let lp_stamp = stamp;

        for &i in &lp {
            elem_adj[i].retain(|&e| !absorbed[e]);
            elem_adj[i].push(p);
            var_adj[i].retain(|&v| !eliminated[v] && mark[v] != lp_stamp);
        }
        elem_vars[p] = lp;

        for idx in 0..elem_vars[p].len() {
            let i = elem_vars[p][idx];
            stamp += 1;
            mark[i] = stamp;
            let mut d = 0;
            for &v in &var_adj[i] {
                if mark[v] != stamp {
                    mark[v] = stamp;
                    d += 1;
                }
            }
            for &e in &elem_adj[i] {
                for &v in &elem_vars[e] {
                    if mark[v] != stamp {
                        mark[v] = stamp;
                        d += 1;
                    }
                }
            }
            queue.remove(&(degree[i], i));
            degree[i] = d;
            queue.insert((d, i));
        }
    }
    Permutation::new(order).expect("each node eliminated once")
}

#[cfg(test)]
mod tests {
    use super::super::symbolic_factor;
    use super::*;

    #[test]
    fn star_graph_eliminates_hub_last() {
        let n = 6;
        let mut t: Vec<_> = (0..n).map(|i| (i, i, 10.0)).collect();
        t.extend((1..n).map(|i| (i, 0, 1.0)));
        let q = SparseSymMatrix::from_triplets(n, &t).unwrap();
        let p = minimum_degree(&q);
        // once a single leaf remains the tie goes to the hub
        assert!(p.new_index(0) >= n - 2);
        assert_eq!(symbolic_factor(&q, Some(&p)).unwrap().nnz(), q.nnz());
    }

    #[test]
    fn deterministic() {
        let q = SparseSymMatrix::from_triplets(4, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0), (3, 0, 0.1), (2, 1, 0.1)])
            .unwrap();
        assert_eq!(minimum_degree(&q), minimum_degree(&q));
    }
}
