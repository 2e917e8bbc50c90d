mod common;

use common::*;
use medalplot_core::dense::{dense_diagnostics, spd_inverse, DenseSymMatrix};
use medalplot_core::sparse::{
    extra_entries_needed, minimum_degree, numeric_factor, obs_diag_variance, off_pattern_inverse_entries,
    run_sparse_pipeline, symbolic_factor, takahashi_selected_inverse, updated_precision, DiagonalNoise, Noise,
    ObservationSet, Ordering, Permutation, PrecisionModel, SparseIncidence, SparseSymMatrix,
};
use medalplot_core::synth::{
    make_lattice_model, make_observations, FootprintSpec, LatticeGMRFSpec, SiteSelection, WeightProfile,
};
use medalplot_core::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn lattice(rows: usize, cols: usize) -> SparseSymMatrix {
    let mut spec = LatticeGMRFSpec::new(rows, cols, 0.3, 1.0);
    spec.heterogeneity = 0.5;
    make_lattice_model(&spec, 3).unwrap().q
}

fn tridiagonal(n: usize) -> SparseSymMatrix {
    let mut t: Vec<_> = (0..n).map(|i| (i, i, 2.5)).collect();
    t.extend((1..n).map(|i| (i, i - 1, -1.0)));
    SparseSymMatrix::from_triplets(n, &t).unwrap()
}

/// Fill pattern of `L` by eliminating a dense boolean matrix.
fn boolean_fill(q: &SparseSymMatrix, perm: Option<&Permutation>) -> Vec<Vec<bool>> {
    let n = q.dim();
    let old = |k: usize| perm.map_or(k, |p| p.old_index(k));
    let mut g = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = i == j || q.contains(old(i), old(j));
        }
    }
    for k in 0..n {
        let below: Vec<usize> = (k + 1..n).filter(|&i| g[i][k]).collect();
        for &i in &below {
            for &j in &below {
                g[i][j] = true;
            }
        }
    }
    g
}

fn random_sparse_spd(seed: u64, n: usize, density: f64) -> SparseSymMatrix {
    let mut r = rng(seed);
    let mut t = Vec::new();
    let mut rowsum = vec![0.0; n];
    for j in 0..n {
        for i in j + 1..n {
            if r.gen_bool(density) {
                let v: f64 = r.gen_range(-1.0..1.0);
                t.push((i, j, v));
                rowsum[i] += v.abs();
                rowsum[j] += v.abs();
            }
        }
    }
    for (i, s) in rowsum.into_iter().enumerate() {
        t.push((i, i, s + r.gen_range(0.1..1.0)));
    }
    SparseSymMatrix::from_triplets(n, &t).unwrap()
}

fn random_nonneg_observations(seed: u64, n: usize, m: usize, max_support: usize) -> (SparseIncidence, DiagonalNoise) {
    let mut r = rng(seed);
    let mut t = Vec::new();
    let mut cols: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let k = r.gen_range(1..=max_support.min(n));
        let (picked, _) = cols.partial_shuffle(&mut r, k);
        for &c in picked.iter() {
            t.push((i, c, r.gen_range(0.1..2.0)));
        }
    }
    let a = SparseIncidence::from_triplets(m, n, &t).unwrap();
    let noise = DiagonalNoise::new((0..m).map(|_| 10f64.powf(r.gen_range(-2.0..1.0))).collect()).unwrap();
    (a, noise)
}

fn dense_inverse(q: &SparseSymMatrix) -> DMatrix<f64> {
    to_na(q.to_dense().matrix()).try_inverse().unwrap()
}

#[test]
fn symbolic_fill_matches_boolean_elimination() {
    let q = lattice(8, 8);
    for perm in [None, Some(minimum_degree(&q))] {
        let sym = symbolic_factor(&q, perm.as_ref()).unwrap();
        let g = boolean_fill(&q, perm.as_ref());
        let n = q.dim();
        let mut expected = 0;
        for j in 0..n {
            for i in j..n {
                assert_eq!(sym.contains(i, j), g[i][j], "({i}, {j})");
                expected += g[i][j] as usize;
            }
        }
        assert_eq!(sym.nnz(), expected);
    }
}

#[test]
fn minimum_degree_reduces_lattice_fill() {
    let q = lattice(16, 16);
    let natural = symbolic_factor(&q, None).unwrap().nnz();
    let md = symbolic_factor(&q, Some(&minimum_degree(&q))).unwrap().nnz();
    assert!(md < natural, "{md} vs {natural}");
}

#[test]
fn factor_reproduces_matrix() {
    for (q, perm) in [
        (random_sparse_spd(1, 100, 0.05), None),
        (lattice(10, 10), None),
        (lattice(10, 10), Some(minimum_degree(&lattice(10, 10)))),
    ] {
        let f = numeric_factor(&q, &symbolic_factor(&q, perm.as_ref()).unwrap()).unwrap();
        let l = to_na(&f.to_dense_l());
        let pq = match &perm {
            Some(p) => to_na(q.permuted(p).unwrap().to_dense().matrix()),
            None => to_na(q.to_dense().matrix()),
        };
        let residual = (&pq - &l * l.transpose()).norm();
        assert!(residual <= 1e-10 * pq.norm(), "{residual}");
    }
}

#[test]
fn factor_matches_nalgebra_cholesky() {
    let q = random_sparse_spd(5, 60, 0.1);
    let f = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap();
    let oracle = to_na(q.to_dense().matrix()).cholesky().unwrap().l();
    assert!((to_na(&f.to_dense_l()) - oracle).amax() <= 1e-12 * q.values().iter().fold(0.0f64, |a, v| a.max(v.abs())));
}

#[test]
fn indefinite_input_names_original_column() {
    let q = SparseSymMatrix::from_triplets(3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (2, 0, 2.0)]).unwrap();
    let perm = Permutation::new(vec![2, 0, 1]).unwrap();
    match numeric_factor(&q, &symbolic_factor(&q, Some(&perm)).unwrap()) {
        Err(Error::NotPositiveDefinite { original, .. }) => assert_eq!(original, 0),
        other => panic!("{other:?}"),
    }
}

fn assert_selected_inverse_matches(q: &SparseSymMatrix, perm: Option<&Permutation>) {
    let f = numeric_factor(q, &symbolic_factor(q, perm).unwrap()).unwrap();
    let xi = takahashi_selected_inverse(&f);
    let dense = dense_inverse(q);
    let tol = 1e-9 * dense.amax();
    let sym = xi.symbolic();
    for j in 0..q.dim() {
        for &i in sym.column(j) {
            let (oi, oj) = (sym.to_original_frame(i), sym.to_original_frame(j));
            let got = xi.get(i, j).unwrap();
            assert!((got - dense[(oi, oj)]).abs() <= tol, "({oi}, {oj}): {got} vs {}", dense[(oi, oj)]);
        }
    }
}

#[test]
fn selected_inverse_tridiagonal() {
    for n in [1, 2, 5, 64, 1024] {
        assert_selected_inverse_matches(&tridiagonal(n), None);
    }
}

#[test]
fn selected_inverse_lattice() {
    assert_selected_inverse_matches(&lattice(12, 12), None);
    let q = lattice(32, 32);
    assert_selected_inverse_matches(&q, Some(&minimum_degree(&q)));
}

#[test]
fn off_pattern_entries_match_dense_inverse() {
    let q = random_sparse_spd(9, 40, 0.04);
    let f = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap();
    let xi = takahashi_selected_inverse(&f);
    let sym = f.symbolic();
    let missing: Vec<(usize, usize)> =
        (0..40).flat_map(|j| (j + 1..40).map(move |i| (i, j))).filter(|&(i, j)| !sym.contains(i, j)).collect();
    assert!(!missing.is_empty());
    let extras = off_pattern_inverse_entries(&f, &xi, &missing);
    let dense = dense_inverse(&q);
    for &(i, j) in &missing {
        let got = extras.get(i, j).expect("requested entry present");
        assert!((got - dense[(i, j)]).abs() <= 1e-9 * dense.amax());
    }
}

#[test]
fn obs_diag_matches_triple_sum() {
    let q = lattice(16, 16);
    let n = q.dim();
    let (a, _) = random_nonneg_observations(21, n, 300, 6);
    let f = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap();
    let xi = takahashi_selected_inverse(&f);
    let extras = off_pattern_inverse_entries(&f, &xi, &extra_entries_needed(&a, &f).unwrap());
    let got = obs_diag_variance(&xi, &extras, &a).unwrap();
    let dense = dense_inverse(&q);
    for (i, &g) in got.iter().enumerate() {
        let (cols, vals) = a.row(i);
        let mut naive = 0.0;
        for (&j, &aj) in cols.iter().zip(vals) {
            for (&k, &ak) in cols.iter().zip(vals) {
                naive += aj * dense[(j, k)] * ak;
            }
        }
        assert!((g - naive).abs() <= 1e-9 * naive.abs(), "row {i}: {g} vs {naive}");
    }
}

#[test]
fn obs_diag_reports_missing_entry() {
    let q = tridiagonal(4);
    let a = SparseIncidence::from_triplets(1, 4, &[(0, 0, 1.0), (0, 3, 1.0)]).unwrap();
    let f = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap();
    let xi = takahashi_selected_inverse(&f);
    let e = obs_diag_variance(&xi, &Default::default(), &a).unwrap_err();
    assert!(matches!(e, Error::MissingInverseEntry { row: 3, col: 0 } | Error::MissingInverseEntry { row: 0, col: 3 }));
}

#[test]
fn updated_precision_keeps_cancelled_entries() {
    let q = SparseSymMatrix::from_triplets(2, &[(0, 0, 2.0), (1, 1, 2.0), (1, 0, -1.0)]).unwrap();
    let a = SparseIncidence::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
    let t = DiagonalNoise::new(vec![1.0]).unwrap();
    let qs = updated_precision(&q, &a, &t).unwrap();
    assert_eq!(qs.get(1, 0), Some(0.0));
    assert!(qs.contains(1, 0));
}

#[test]
fn updated_precision_matches_dense_form() {
    let q = random_sparse_spd(2, 30, 0.1);
    let (a, t) = random_nonneg_observations(4, 30, 12, 4);
    let qs = to_na(updated_precision(&q, &a, &t).unwrap().to_dense().matrix());
    let ad = to_na(a.to_dense().matrix());
    let tinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(12, t.variances().iter().map(|v| 1.0 / v)));
    let oracle = to_na(q.to_dense().matrix()) + ad.transpose() * tinv * &ad;
    assert!((qs - oracle).amax() <= 1e-12 * 100.0);
}

#[test]
fn pattern_chain_holds() {
    let q = lattice(6, 6);
    let (a, t) = random_nonneg_observations(8, 36, 20, 5);
    let qs = updated_precision(&q, &a, &t).unwrap();
    let f = numeric_factor(&qs, &symbolic_factor(&qs, None).unwrap()).unwrap();
    let sym = f.symbolic();
    for j in 0..36 {
        for i in j..36 {
            if qs.contains(i, j) {
                assert!(sym.contains(i, j));
            }
        }
    }
    for r in 0..a.rows() {
        let (cols, _) = a.row(r);
        for &i in cols {
            for &j in cols {
                if i >= j {
                    assert!(qs.contains(i, j));
                }
            }
        }
    }
}

#[test]
fn negative_incidence_is_rejected() {
    let q = tridiagonal(5);
    let a = SparseIncidence::from_triplets(1, 5, &[(0, 1, 1.0), (0, 3, -0.5)]).unwrap();
    let f = numeric_factor(&q, &symbolic_factor(&q, None).unwrap()).unwrap();
    assert!(matches!(extra_entries_needed(&a, &f), Err(Error::NegativeIncidence { row: 0, col: 3 })));
    let obs = ObservationSet::new(a, Noise::Diagonal(DiagonalNoise::new(vec![1.0]).unwrap()), None).unwrap();
    assert!(matches!(
        run_sparse_pipeline(&PrecisionModel::new(q), &obs),
        Err(Error::NegativeIncidence { .. })
    ));
}

#[test]
fn dense_noise_is_rejected_by_sparse_pipeline() {
    let q = tridiagonal(3);
    let a = SparseIncidence::from_triplets(1, 3, &[(0, 1, 1.0)]).unwrap();
    let obs = ObservationSet::new(a, Noise::Dense(DenseSymMatrix::identity(1)), None).unwrap();
    assert_eq!(run_sparse_pipeline(&PrecisionModel::new(q), &obs).unwrap_err(), Error::NonDiagonalNoise);
}

fn mixed_instruments(rows: usize, cols: usize, m_point: usize, m_wide: usize) -> (LatticeGMRFSpec, Vec<FootprintSpec>) {
    let mut spec = LatticeGMRFSpec::new(rows, cols, 0.2, 1.0);
    spec.heterogeneity = 0.3;
    let point = FootprintSpec::point(0.05, SiteSelection::Count(m_point));
    let wide = FootprintSpec {
        radius: 3.0,
        profile: WeightProfile::LinearDecay,
        noise_variance: 0.5,
        sites: SiteSelection::Count(m_wide),
        processes: vec![0],
    };
    (spec, vec![point, wide])
}

fn compare_with_dense(model: &PrecisionModel, obs: &ObservationSet) {
    let (d, _) = run_sparse_pipeline(model, obs).unwrap();
    let xi = spd_inverse(&model.q.to_dense(), "Q").unwrap();
    let oracle = dense_diagnostics(&xi, &obs.a.to_dense(), &obs.noise.to_dense()).unwrap();
    for (s, o) in d.records.iter().zip(&oracle.records) {
        for (x, y) in [(s.prior_var, o.prior_var), (s.joint_var, o.joint_var), (s.local_var, o.local_var)] {
            assert!((x - y).abs() <= 1e-8 * y.abs(), "{x} vs {y}");
        }
        assert_eq!(s.error_var, o.error_var);
    }
}

#[test]
fn pipeline_matches_dense_oracle_on_small_lattice() {
    let (spec, fps) = mixed_instruments(10, 10, 60, 20);
    let model = make_lattice_model(&spec, 1).unwrap();
    let obs = make_observations(&spec, &fps, 2).unwrap();
    compare_with_dense(&model, &obs);
    compare_with_dense(&model.clone().with_ordering(Ordering::MinimumDegree), &obs);
}

#[test]
fn pipeline_matches_dense_oracle_two_processes() {
    let mut spec = LatticeGMRFSpec::new(8, 8, 0.5, 1.0).with_processes(2);
    spec.heterogeneity = 0.2;
    let fps = vec![
        FootprintSpec { processes: vec![0, 1], ..FootprintSpec::point(0.1, SiteSelection::Coverage(0.5)) },
        FootprintSpec {
            radius: 2.0,
            profile: WeightProfile::Uniform,
            noise_variance: 1.0,
            sites: SiteSelection::Count(10),
            processes: vec![1],
        },
    ];
    let model = make_lattice_model(&spec, 4).unwrap().with_ordering(Ordering::MinimumDegree);
    let obs = make_observations(&spec, &fps, 5).unwrap();
    compare_with_dense(&model, &obs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn no_extra_entries_after_update(seed in any::<u64>(), n in 2usize..60, m in 1usize..30, md in any::<bool>()) {
        let q = random_sparse_spd(seed, n, 0.05);
        let (a, t) = random_nonneg_observations(seed ^ 1, n, m, 5);
        let qs = updated_precision(&q, &a, &t).unwrap();
        let perm = md.then(|| minimum_degree(&qs));
        let f = numeric_factor(&qs, &symbolic_factor(&qs, perm.as_ref()).unwrap()).unwrap();
        prop_assert!(extra_entries_needed(&a, &f).unwrap().is_empty());
    }

    #[test]
    fn sparse_pipeline_agrees_with_dense(seed in any::<u64>(), n in 2usize..40, m in 1usize..25) {
        let q = random_sparse_spd(seed, n, 0.08);
        let (a, t) = random_nonneg_observations(seed ^ 2, n, m, 4);
        let obs = ObservationSet::new(a, Noise::Diagonal(t), None).unwrap();
        compare_with_dense(&PrecisionModel::new(q), &obs);
    }
}
