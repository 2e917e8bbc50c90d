//! Bound verdicts and medal geometry built from per-observation variances.
//!
//! For each observation `i` the chain
//! `joint_var ≤ local_var ≤ min(prior_var, error_var)` must hold, and the
//! local update never falls below half of `min(prior_var, error_var)`.
//! A violation of the upper bound is evidence of a defect in the code or
//! the model that produced the variances.

use alloc::vec::Vec;

use crate::dense::{induced_norm, spd_inverse, DenseSymMatrix, NormKind};
use crate::{dense, Error, Result};

/// Relative tolerance for verdicts, scaled by `max(prior_var, error_var)`.
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MIN_RIM: f64 = 0.01;
pub const DEFAULT_STABLE_THRESHOLD: f64 = 0.01;
/// Absolute slack used when comparing the perturbation bound.
pub const LIMIT_SLACK: f64 = 1e-10;

/// Variances for one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsRecord {
    pub prior_var: f64,
    pub error_var: f64,
    pub local_var: f64,
    pub joint_var: f64,
}

/// Which variance supplies the upper bound `min(prior_var, error_var)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    Prior,
    ObservationError,
}

impl BoundSource {
    pub fn name(self) -> &'static str {
        match self {
            BoundSource::Prior => "prior",
            BoundSource::ObservationError => "error",
        }
    }

    pub fn rim_color(self) -> RimColor {
        match self {
            BoundSource::Prior => RimColor::Red,
            BoundSource::ObservationError => RimColor::Blue,
        }
    }
}

impl ObsRecord {
    pub fn bound(&self) -> f64 {
        self.prior_var.min(self.error_var)
    }

    /// Ties go to the observation error.
    pub fn bound_source(&self) -> BoundSource {
        if self.error_var <= self.prior_var {
            BoundSource::ObservationError
        } else {
            BoundSource::Prior
        }
    }

    fn scale(&self) -> f64 {
        self.prior_var.max(self.error_var)
    }
}

/// Per-observation variances plus global findings.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateDiagnostics {
    pub records: Vec<ObsRecord>,
    /// Indices failing [`check_bounds`] at [`DEFAULT_TOL`].
    pub bound_violations: Vec<usize>,
    pub limit_report: Option<LimitReport>,
}

impl UpdateDiagnostics {
    /// Assembles records from `diag Σ`, `diag T` and `diag Σ*`, computing the
    /// local updates.
    pub fn from_vectors(prior: &[f64], error: &[f64], joint: &[f64]) -> Result<Self> {
        let m = prior.len();
        if error.len() != m || joint.len() != m {
            return Err(Error::DimensionMismatch {
                op: "UpdateDiagnostics::from_vectors",
                expected: (m, 1),
                found: (error.len().max(joint.len()), 1),
            });
        }
        let records = prior
            .iter()
            .zip(error)
            .zip(joint)
            .map(|((&p, &e), &j)| {
                Ok(ObsRecord { prior_var: p, error_var: e, local_var: dense::local_update(p, e)?, joint_var: j })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_records(records))
    }

    pub fn from_records(records: Vec<ObsRecord>) -> Self {
        let mut d = UpdateDiagnostics { records, bound_violations: Vec::new(), limit_report: None };
        d.refresh_violations(DEFAULT_TOL);
        d
    }

    pub fn refresh_violations(&mut self, tol: f64) {
        self.bound_violations =
            check_bounds(self, tol).into_iter().filter(|v| !v.passed()).map(|v| v.index).collect();
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn prior(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.prior_var).collect()
    }

    pub fn error(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error_var).collect()
    }

    pub fn local(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.local_var).collect()
    }

    pub fn joint(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.joint_var).collect()
    }
}

/// Outcome of the bound checks for one observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub index: usize,
    pub nonnegative: bool,
    pub joint_le_prior: bool,
    pub joint_le_error: bool,
    pub joint_le_local: bool,
    pub local_consistent: bool,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.nonnegative && self.joint_le_prior && self.joint_le_error && self.joint_le_local && self.local_consistent
    }
}

/// Checks every record against its bounds with slack `tol · max(prior_var, error_var)`.
pub fn check_bounds(d: &UpdateDiagnostics, tol: f64) -> Vec<Verdict> {
    d.records
        .iter()
        .enumerate()
        .map(|(index, r)| {
            let slack = tol * r.scale();
            let recomputed = dense::local_update(r.prior_var, r.error_var);
            Verdict {
                index,
                nonnegative: r.joint_var >= -slack && r.local_var >= -slack,
                joint_le_prior: r.joint_var <= r.prior_var + slack,
                joint_le_error: r.joint_var <= r.error_var + slack,
                joint_le_local: r.joint_var <= r.local_var + slack,
                local_consistent: recomputed.is_ok_and(|l| (l - r.local_var).abs() <= slack),
            }
        })
        .collect()
}

pub fn all_pass(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(Verdict::passed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitStatus {
    /// `r < 1` and the bound holds.
    Holds,
    /// `r < 1` but the bound fails: a numerical or coding defect.
    Violated,
    /// `r ≥ 1`; the bound says nothing.
    RadiusTooLarge,
    /// `Σ` is singular; convergence of `Σ*` to `T` is not implied.
    SigmaSingular,
    ErrorSingular,
}

/// Perturbation bound `‖Σ* − T‖ ≤ ‖Σ⁻¹‖ ‖T‖² / (1 − r)` with `r = ‖T Σ⁻¹‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport {
    pub norm_kind: NormKind,
    pub r: Option<f64>,
    /// `‖Σ* − T‖`, always reported.
    pub lhs: f64,
    pub rhs: Option<f64>,
    /// `‖Σ* − T‖ / ‖T‖`: how far `Σ*` is from `T`.
    pub relative_gap: f64,
    pub status: LimitStatus,
}

impl LimitReport {
    pub fn applicable(&self) -> bool {
        matches!(self.status, LimitStatus::Holds | LimitStatus::Violated)
    }
}

pub fn check_limit(
    sigma: &DenseSymMatrix,
    t: &DenseSymMatrix,
    sigma_star: &DenseSymMatrix,
    norm_kind: NormKind,
) -> Result<LimitReport> {
    let m = sigma.dim();
    if t.dim() != m || sigma_star.dim() != m {
        return Err(Error::DimensionMismatch { op: "check_limit", expected: (m, m), found: (t.dim(), sigma_star.dim()) });
    }
    let diff = sigma_star.matrix().sub(t.matrix())?;
    let lhs = induced_norm(&diff, norm_kind);
    let t_norm = induced_norm(t.matrix(), norm_kind);
    let relative_gap = if t_norm > 0.0 { lhs / t_norm } else { f64::INFINITY };
    let mut report = LimitReport { norm_kind, r: None, lhs, rhs: None, relative_gap, status: LimitStatus::SigmaSingular };

    if let Err(e) = spd_inverse(t, "T") {
        return match e {
            Error::Singular { .. } => {
                report.status = LimitStatus::ErrorSingular;
                Ok(report)
            }
            e => Err(e),
        };
    }
    let sigma_inv = match spd_inverse(sigma, "Σ") {
        Ok(inv) => inv,
        Err(Error::Singular { .. }) => return Ok(report),
        Err(e) => return Err(e),
    };
    let r = induced_norm(&t.matrix().matmul(sigma_inv.matrix())?, norm_kind);
    report.r = Some(r);
    if r >= 1.0 {
        report.status = LimitStatus::RadiusTooLarge;
        return Ok(report);
    }
    let rhs = induced_norm(sigma_inv.matrix(), norm_kind) * t_norm * t_norm / (1.0 - r);
    report.rhs = Some(rhs);
    report.status = if lhs <= rhs + LIMIT_SLACK { LimitStatus::Holds } else { LimitStatus::Violated };
    Ok(report)
}

/// Observations where the error variance is small against the prior
/// (`error/prior < threshold`) yet the joint update sits clearly below the
/// error variance (`joint/error < 1 − threshold`), i.e. where the plug-in
/// reading `Var(Y|Z) ≈ Var(E)` is not trustworthy.
pub fn stable_inference_check(d: &UpdateDiagnostics, threshold: f64) -> Result<Vec<usize>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidSpec("stable-inference threshold must lie in (0, 1)"));
    }
    Ok(d.records
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            r.prior_var > 0.0
                && r.error_var > 0.0
                && r.error_var / r.prior_var < threshold
                && r.joint_var / r.error_var < 1.0 - threshold
        })
        .map(|(i, _)| i)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RimColor {
    Red,
    Blue,
}

/// Three concentric disks for one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medal {
    pub center: [f64; 2],
    /// Outer disk: `scale · √min(prior_var, error_var)`, possibly expanded
    /// so the rim stays visible.
    pub r_bound: f64,
    /// `scale · √local_var`.
    pub r_local: f64,
    /// `scale · √joint_var`.
    pub r_joint: f64,
    pub rim_color: RimColor,
    /// `min(prior, error) / max(prior, error)`.
    pub kappa: f64,
    /// Outer radius before rim expansion.
    pub r_bound_raw: f64,
}

impl Medal {
    pub fn rim_expanded(&self) -> bool {
        self.r_bound != self.r_bound_raw
    }

    /// Rim thickness relative to the unexpanded outer radius.
    pub fn raw_rim_fraction(&self) -> f64 {
        if self.r_bound_raw > 0.0 {
            (self.r_bound_raw - self.r_local) / self.r_bound_raw
        } else {
            0.0
        }
    }

    pub fn annulus_width(&self) -> f64 {
        self.r_local - self.r_joint
    }
}

pub fn build_medals(d: &UpdateDiagnostics, locations: &[[f64; 2]], scale: f64, min_rim: f64) -> Result<Vec<Medal>> {
    if locations.len() != d.len() {
        return Err(Error::DimensionMismatch {
            op: "build_medals",
            expected: (d.len(), 2),
            found: (locations.len(), 2),
        });
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidSpec("medal scale must be positive"));
    }
    if !(0.0..0.05).contains(&min_rim) {
        return Err(Error::InvalidSpec("min_rim must lie in [0, 0.05)"));
    }
    d.records.iter().zip(locations).map(|(r, &center)| medal(r, center, scale, min_rim)).collect()
}

fn medal(r: &ObsRecord, center: [f64; 2], scale: f64, min_rim: f64) -> Result<Medal> {
    for (what, value) in [("prior variance", r.prior_var), ("error variance", r.error_var), ("local variance", r.local_var)]
    {
        if !(value >= 0.0) {
            return Err(Error::InvalidVariance { what, value });
        }
    }
    let snap = DEFAULT_TOL * r.scale();
    if r.joint_var < -snap || r.joint_var.is_nan() {
        return Err(Error::InvalidVariance { what: "joint variance", value: r.joint_var });
    }
    let bound = r.bound();
    let r_bound_raw = scale * libm::sqrt(bound);
    let r_local = (scale * libm::sqrt(r.local_var)).min(r_bound_raw);
    // Joint within verdict tolerance of local is drawn as equal, so a
    // single-observation update (joint = local) renders exactly nested.
    let r_joint = if (r.joint_var - r.local_var).abs() <= snap {
        r_local
    } else {
        scale * libm::sqrt(r.joint_var.max(0.0))
    };
    let mut r_bound = r_bound_raw;
    if r_bound > 0.0 && r_bound - r_local < min_rim * r_bound {
        r_bound = r_local / (1.0 - min_rim);
    }
    let hi = r.scale();
    Ok(Medal {
        center,
        r_bound,
        r_local,
        r_joint,
        rim_color: r.bound_source().rim_color(),
        kappa: if hi > 0.0 { bound / hi } else { 1.0 },
        r_bound_raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn record(prior: f64, error: f64, joint: f64) -> ObsRecord {
        ObsRecord { prior_var: prior, error_var: error, local_var: dense::local_update(prior, error).unwrap(), joint_var: joint }
    }

    #[test]
    fn injected_violation_is_flagged_at_its_index() {
        let mut d = UpdateDiagnostics::from_records(vec![record(4.0, 1.0, 0.5), record(2.0, 0.5, 0.3)]);
        assert!(d.bound_violations.is_empty());
        d.records[1].joint_var = 0.6;
        let verdicts = check_bounds(&d, DEFAULT_TOL);
        assert!(verdicts[0].passed());
        assert!(!verdicts[1].joint_le_error);
        assert!(!all_pass(&verdicts));
    }

    #[test]
    fn equal_variances_give_maximal_rim() {
        let d = UpdateDiagnostics::from_records(vec![record(1.0, 1.0, 0.5)]);
        let m = build_medals(&d, &[[0.0, 0.0]], 2.0, 0.0).unwrap()[0];
        assert_eq!(m.r_bound, 2.0);
        assert!((m.r_local - 2.0 / libm::sqrt(2.0)).abs() < 1e-15);
        assert_eq!(m.r_joint, m.r_local);
        assert!((m.raw_rim_fraction() - (1.0 - 1.0 / libm::sqrt(2.0))).abs() < 1e-15);
        assert_eq!(m.rim_color, RimColor::Blue);
    }

    #[test]
    fn thin_blue_rim_when_error_is_small() {
        let d = UpdateDiagnostics::from_records(vec![record(1e4, 1.0, 0.2)]);
        let m = build_medals(&d, &[[0.0, 0.0]], 1.0, 0.0).unwrap()[0];
        assert_eq!(m.rim_color, RimColor::Blue);
        assert!(m.raw_rim_fraction() < 1e-4);
        let expanded = build_medals(&d, &[[0.0, 0.0]], 1.0, 0.01).unwrap()[0];
        assert!(expanded.rim_expanded());
        assert!(((expanded.r_bound - expanded.r_local) / expanded.r_bound - 0.01).abs() < 1e-12);
        assert_eq!(expanded.r_local, m.r_local);
        assert_eq!(expanded.r_joint, m.r_joint);
    }

    #[test]
    fn red_rim_when_prior_is_smaller() {
        let d = UpdateDiagnostics::from_records(vec![record(0.5, 2.0, 0.3)]);
        let m = build_medals(&d, &[[1.0, 2.0]], 1.0, 0.0).unwrap()[0];
        assert_eq!(m.rim_color, RimColor::Red);
        assert_eq!(m.kappa, 0.25);
    }

    #[test]
    fn medal_argument_validation() {
        let d = UpdateDiagnostics::from_records(vec![record(1.0, 1.0, 0.5)]);
        assert!(build_medals(&d, &[], 1.0, 0.0).is_err());
        assert!(build_medals(&d, &[[0.0, 0.0]], 0.0, 0.0).is_err());
        assert!(build_medals(&d, &[[0.0, 0.0]], 1.0, 0.05).is_err());
        let mut bad = d.clone();
        bad.records[0].joint_var = -1.0;
        assert!(build_medals(&bad, &[[0.0, 0.0]], 1.0, 0.0).is_err());
    }

    #[test]
    fn stable_inference_principle_holds_for_tiny_error() {
        let d = UpdateDiagnostics::from_records(vec![record(1.0, 1e-3, 0.999e-3 * 0.9995)]);
        assert!(stable_inference_check(&d, 0.01).unwrap().is_empty());
        assert!(stable_inference_check(&d, 1.0).is_err());
    }

    #[test]
    fn limit_for_scalar_multiple() {
        let sigma = DenseSymMatrix::identity(3);
        let t = DenseSymMatrix::from_diagonal(&[0.1; 3]).unwrap();
        let star = dense::joint_update(&sigma, &t).unwrap();
        for kind in [NormKind::One, NormKind::Two, NormKind::Inf] {
            let rep = check_limit(&sigma, &t, &star, kind).unwrap();
            assert_eq!(rep.status, LimitStatus::Holds);
            assert!((rep.r.unwrap() - 0.1).abs() < 1e-12);
            assert!((rep.lhs - (0.1 - 0.1 / 1.1)).abs() < 1e-12);
            assert!((rep.rhs.unwrap() - 0.01 / 0.9).abs() < 1e-12);
        }
    }
}
