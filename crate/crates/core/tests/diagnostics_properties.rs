mod common;

use common::*;
use medalplot_core::dense::{dense_diagnostics, joint_update, prior_obs_variance, DenseSymMatrix, NormKind};
use medalplot_core::diagnostics::{
    all_pass, build_medals, check_bounds, check_limit, stable_inference_check, BoundSource, LimitStatus, RimColor,
    UpdateDiagnostics, DEFAULT_TOL,
};
use medalplot_core::synth::counterexample_fixture;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

const RIM_LAW: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

fn random_diagnostics(seed: u64, n: usize, m: usize) -> UpdateDiagnostics {
    let mut r = rng(seed);
    let (kx, kt) = (10f64.powf(r.gen_range(-3.0..3.0)), 10f64.powf(r.gen_range(-3.0..3.0)));
    let xi = random_spd(&mut r, n, kx);
    let a = random_incidence(&mut r, m, n, true).map(f64::abs);
    let t = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| kt * r.gen_range(0.1..10.0)));
    dense_diagnostics(&sym_from_na(&xi), &incidence_from_na(&a), &sym_from_na(&t)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn single_corruption_fails_exactly_there(seed in any::<u64>(), n in 1usize..10, m in 1usize..12, pick in any::<prop::sample::Index>(), bump in 1e-6f64..10.0) {
        let mut d = random_diagnostics(seed, n, m);
        prop_assert!(all_pass(&check_bounds(&d, DEFAULT_TOL)));
        let i = pick.index(m);
        let rec = &mut d.records[i];
        rec.joint_var = rec.bound() + bump * rec.prior_var.max(rec.error_var);
        let failing: Vec<usize> = check_bounds(&d, DEFAULT_TOL).iter().filter(|v| !v.passed()).map(|v| v.index).collect();
        prop_assert_eq!(failing, vec![i]);
    }

    #[test]
    fn medals_nest_and_respect_rim_law(seed in any::<u64>(), n in 1usize..10, m in 1usize..12, scale in 0.01f64..100.0, min_rim in 0.0f64..0.05) {
        let d = random_diagnostics(seed, n, m);
        let locs: Vec<[f64; 2]> = (0..m).map(|i| [i as f64, 0.0]).collect();
        for (medal, rec) in build_medals(&d, &locs, scale, min_rim).unwrap().iter().zip(&d.records) {
            prop_assert!(medal.r_joint <= medal.r_local);
            prop_assert!(medal.r_local <= medal.r_bound);
            prop_assert!(medal.r_bound >= medal.r_bound_raw);
            prop_assert!(medal.raw_rim_fraction() <= RIM_LAW + 1e-12);
            prop_assert!((medal.r_bound - medal.r_local) >= min_rim * medal.r_bound * (1.0 - 1e-12));
            prop_assert_eq!(medal.rim_color, rec.bound_source().rim_color());
        }
    }

    #[test]
    fn colour_ignores_common_scaling(s in 1e-6f64..1e6, t in 1e-6f64..1e6, c in 1e-6f64..1e6) {
        let rec = |s: f64, t: f64| UpdateDiagnostics::from_vectors(&[s], &[t], &[0.0]).unwrap().records[0];
        prop_assert_eq!(rec(s, t).bound_source(), rec(c * s, c * t).bound_source());
        let expected = if t <= s { BoundSource::ObservationError } else { BoundSource::Prior };
        prop_assert_eq!(rec(s, t).bound_source(), expected);
    }

    #[test]
    fn limit_bound_holds_when_radius_below_one(seed in any::<u64>(), m in 1usize..10) {
        let mut r = rng(seed);
        let sigma = random_spd(&mut r, m, 1.0);
        let t = random_spd(&mut r, m, 1.0);
        let lmin = min_eig(&sigma);
        let shrink = r.gen_range(0.01..0.9) * lmin / t.norm();
        let t = t * shrink;
        let (s_sym, t_sym) = (sym_from_na(&sigma), sym_from_na(&t));
        let star = joint_update(&s_sym, &t_sym).unwrap();
        for kind in [NormKind::One, NormKind::Two, NormKind::Inf] {
            let rep = check_limit(&s_sym, &t_sym, &star, kind).unwrap();
            if rep.r.unwrap() < 1.0 {
                prop_assert_eq!(rep.status, LimitStatus::Holds);
                prop_assert!(rep.lhs <= rep.rhs.unwrap() + 1e-10);
            }
        }
    }
}

#[test]
fn single_observation_medal_joint_equals_local() {
    let xi = DenseSymMatrix::from_rows(&[[3.0, 1.0], [1.0, 2.0]]).unwrap();
    let a = medalplot_core::dense::IncidenceMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
    let t = DenseSymMatrix::from_diagonal(&[0.7]).unwrap();
    let d = dense_diagnostics(&xi, &a, &t).unwrap();
    let m = build_medals(&d, &[[0.0, 0.0]], 3.0, 0.01).unwrap()[0];
    assert_eq!(m.r_joint, m.r_local);
}

#[test]
fn singular_prior_makes_limit_inapplicable() {
    let fx = counterexample_fixture();
    let sigma = prior_obs_variance(&fx.xi, &fx.a).unwrap();
    let star = joint_update(&sigma, &fx.t).unwrap();
    for kind in [NormKind::One, NormKind::Two, NormKind::Inf] {
        let rep = check_limit(&sigma, &fx.t, &star, kind).unwrap();
        assert_eq!(rep.status, LimitStatus::SigmaSingular);
        assert!(!rep.applicable());
        assert!(rep.relative_gap > 0.5, "Σ* stays far from T: {}", rep.relative_gap);
    }
}

#[test]
fn large_radius_is_reported() {
    let sigma = DenseSymMatrix::from_diagonal(&[1.0, 1.0]).unwrap();
    let t = DenseSymMatrix::from_diagonal(&[2.0, 0.5]).unwrap();
    let star = joint_update(&sigma, &t).unwrap();
    let rep = check_limit(&sigma, &t, &star, NormKind::Two).unwrap();
    assert_eq!(rep.status, LimitStatus::RadiusTooLarge);
    assert!(rep.rhs.is_none());
}

#[test]
fn stable_inference_flags_singular_prior_observations() {
    let fx = counterexample_fixture();
    let sigma = prior_obs_variance(&fx.xi, &fx.a).unwrap();
    let star = joint_update(&sigma, &fx.t).unwrap();
    let d = UpdateDiagnostics::from_vectors(&sigma.diagonal(), &fx.t.diagonal(), &star.diagonal()).unwrap();
    // all three error variances are tiny against the prior, yet Σ*₁₁ ≈ T₁₁/6
    assert_eq!(stable_inference_check(&d, 0.01).unwrap(), vec![0, 1, 2]);
    assert!(stable_inference_check(&d, 1.5).is_err());

    let d = UpdateDiagnostics::from_vectors(&[1e6], &[1.0], &[1.0 / (1.0 + 1e-6)]).unwrap();
    assert!(stable_inference_check(&d, 0.01).unwrap().is_empty());
}

#[test]
fn rim_colours_for_fixture() {
    let fx = counterexample_fixture();
    let sigma = prior_obs_variance(&fx.xi, &fx.a).unwrap();
    let star = joint_update(&sigma, &fx.t).unwrap();
    let d = UpdateDiagnostics::from_vectors(&sigma.diagonal(), &fx.t.diagonal(), &star.diagonal()).unwrap();
    let medals = build_medals(&d, &[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], 1.0, 0.01).unwrap();
    assert!(medals.iter().all(|m| m.rim_color == RimColor::Blue));
}
