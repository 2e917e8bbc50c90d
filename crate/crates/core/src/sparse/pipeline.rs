use alloc::vec::Vec;

use super::{
    extra_entries_needed, minimum_degree, numeric_factor, obs_diag_variance, off_pattern_inverse_entries,
    symbolic_factor, takahashi_selected_inverse, updated_precision, DiagonalNoise, Permutation, SparseIncidence,
    SparseSymMatrix,
};
use crate::dense::DenseSymMatrix;
use crate::diagnostics::UpdateDiagnostics;
use crate::{Error, Result};

/// Elimination ordering for the sparse factorizations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Ordering {
    #[default]
    Natural,
    /// Minimum degree on the pattern of `Q*`, shared by both factorizations.
    MinimumDegree,
    Given(Permutation),
}

/// Sparse precision of the state vector plus the ordering to factor it with.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionModel {
    pub q: SparseSymMatrix,
    pub ordering: Ordering,
}

impl PrecisionModel {
    pub fn new(q: SparseSymMatrix) -> Self {
        PrecisionModel { q, ordering: Ordering::Natural }
    }

    pub fn with_ordering(mut self, ordering: Ordering) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }
}

/// Observation-error variance `T`.
#[derive(Debug, Clone, PartialEq)]
pub enum Noise {
    Diagonal(DiagonalNoise),
    /// General `T`; only the dense path accepts it.
    Dense(DenseSymMatrix),
}

impl Noise {
    pub fn len(&self) -> usize {
        match self {
            Noise::Diagonal(d) => d.len(),
            Noise::Dense(m) => m.dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        match self {
            Noise::Diagonal(d) => d.variances().to_vec(),
            Noise::Dense(m) => m.diagonal(),
        }
    }

    pub fn to_dense(&self) -> DenseSymMatrix {
        match self {
            Noise::Diagonal(d) => d.to_dense(),
            Noise::Dense(m) => m.clone(),
        }
    }

    pub fn as_diagonal(&self) -> Option<&DiagonalNoise> {
        match self {
            Noise::Diagonal(d) => Some(d),
            Noise::Dense(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub a: SparseIncidence,
    pub noise: Noise,
    /// Optional 2-D location per observation (map units).
    pub locations: Option<Vec<[f64; 2]>>,
}

impl ObservationSet {
    pub fn new(a: SparseIncidence, noise: Noise, locations: Option<Vec<[f64; 2]>>) -> Result<Self> {
        let m = a.rows();
        if noise.len() != m {
            return Err(Error::DimensionMismatch { op: "ObservationSet", expected: (m, m), found: (noise.len(), noise.len()) });
        }
        if let Some(loc) = &locations {
            if loc.len() != m {
                return Err(Error::DimensionMismatch { op: "ObservationSet locations", expected: (m, 2), found: (loc.len(), 2) });
            }
        }
        Ok(ObservationSet { a, noise, locations })
    }

    pub fn len(&self) -> usize {
        self.a.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.a.rows() == 0
    }
}

/// Sizes seen by one sparse pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineStats {
    pub n: usize,
    pub m: usize,
    pub nnz_q: usize,
    pub nnz_q_updated: usize,
    pub nnz_l: usize,
    pub nnz_l_updated: usize,
    /// Off-pattern entries of the prior `Ξ` that had to be computed.
    pub prior_extras: usize,
}

/// Computes `diag(A Ξ Aᵀ)`, `diag(A Ξ* Aᵀ)`, `diag T` and the local updates.
pub fn sparse_diagnostic_pipeline(model: &PrecisionModel, obs: &ObservationSet) -> Result<UpdateDiagnostics> {
    run_sparse_pipeline(model, obs).map(|(d, _)| d)
}

/// [`sparse_diagnostic_pipeline`] plus size statistics.
pub fn run_sparse_pipeline(model: &PrecisionModel, obs: &ObservationSet) -> Result<(UpdateDiagnostics, PipelineStats)> {
    let t = obs.noise.as_diagonal().ok_or(Error::NonDiagonalNoise)?;
    let a = &obs.a;
    if let Some((row, col)) = a.first_negative() {
        return Err(Error::NegativeIncidence { row, col });
    }
    let q = &model.q;
    let q_star = updated_precision(q, a, t)?;
    let perm = match &model.ordering {
        Ordering::Natural => None,
        Ordering::MinimumDegree => Some(minimum_degree(&q_star)),
        Ordering::Given(p) => Some(p.clone()),
    };
    let mut stats = PipelineStats { n: q.dim(), m: a.rows(), nnz_q: q.nnz(), nnz_q_updated: q_star.nnz(), ..Default::default() };

    let prior = {
        let sym = symbolic_factor(q, perm.as_ref())?;
        let f = numeric_factor(q, &sym)?;
        drop(sym);
        stats.nnz_l = f.nnz();
        let xi = takahashi_selected_inverse(&f);
        let extra = extra_entries_needed(a, &f)?;
        stats.prior_extras = extra.len();
        let extras = off_pattern_inverse_entries(&f, &xi, &extra);
        obs_diag_variance(&xi, &extras, a)?
    };

    let joint = {
        let sym = symbolic_factor(&q_star, perm.as_ref())?;
        let f = numeric_factor(&q_star, &sym)?;
        drop(sym);
        stats.nnz_l_updated = f.nnz();
        let xi = takahashi_selected_inverse(&f);
        let extra = extra_entries_needed(a, &f)?;
        if let Some(&first) = extra.first() {
            return Err(Error::SparsityTheoremViolated { count: extra.len(), first });
        }
        obs_diag_variance(&xi, &super::OffPatternEntries::new(), a)?
    };

    let d = UpdateDiagnostics::from_vectors(&prior, t.variances(), &joint)?;
    Ok((d, stats))
}
