//! Seeded synthetic instances: lattice GMRF priors and point / wide
//! footprint observations with diagonal noise. Also the fixed 2-state,
//! 3-observation fixture with singular `Σ`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{spd_inverse, DenseSymMatrix, IncidenceMatrix};
use crate::sparse::{DiagonalNoise, Noise, ObservationSet, PrecisionModel, SparseIncidence, SparseSymMatrix};
use crate::{Error, Result};

/// `Q = diag(κ_s) + τ · Laplacian` on a 4-neighbour `rows × cols` lattice,
/// one independent block per process.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGMRFSpec {
    pub rows: usize,
    pub cols: usize,
    pub kappa: f64,
    pub tau: f64,
    pub processes: usize,
    /// Site-level variability: `κ_s = κ (1 + h u)`, `u ~ U[0, 1)`. Zero
    /// gives a homogeneous field.
    pub heterogeneity: f64,
}

impl LatticeGMRFSpec {
    pub fn new(rows: usize, cols: usize, kappa: f64, tau: f64) -> Self {
        LatticeGMRFSpec { rows, cols, kappa, tau, processes: 1, heterogeneity: 0.0 }
    }

    pub fn with_processes(mut self, processes: usize) -> Self {
        self.processes = processes;
        self
    }

    pub fn sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn dim(&self) -> usize {
        self.sites() * self.processes
    }

    /// State index of `(process, row, col)`: processes are stacked blocks.
    pub fn state_index(&self, process: usize, row: usize, col: usize) -> usize {
        process * self.sites() + row * self.cols + col
    }

    fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidSpec("kappa must be positive"));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidSpec("tau must be non-negative"));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidSpec("grid must be non-empty"));
        }
        if self.processes == 0 {
            return Err(Error::InvalidSpec("at least one process is required"));
        }
        if !(self.heterogeneity >= 0.0 && self.heterogeneity.is_finite()) {
            return Err(Error::InvalidSpec("heterogeneity must be non-negative"));
        }
        Ok(())
    }
}

pub fn make_lattice_model(spec: &LatticeGMRFSpec, seed: u64) -> Result<PrecisionModel> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, cols) = (spec.rows, spec.cols);
    let mut cols_out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); spec.dim()];
    for p in 0..spec.processes {
        for r in 0..rows {
            for c in 0..cols {
                let s = spec.state_index(p, r, c);
                let kappa_s = if spec.heterogeneity > 0.0 {
                    spec.kappa * (1.0 + spec.heterogeneity * rng.gen::<f64>())
                } else {
                    spec.kappa
                };
                let mut degree = 0.0;
                // lower-triangle neighbours are right and below
                if c + 1 < cols {
                    cols_out[s].push((spec.state_index(p, r, c + 1), -spec.tau));
                }
                if r + 1 < rows {
                    cols_out[s].push((spec.state_index(p, r + 1, c), -spec.tau));
                }
                for (dr, dc) in [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)] {
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr >= 0 && nc >= 0 && (nr as usize) < rows && (nc as usize) < cols {
                        degree += 1.0;
                    }
                }
                cols_out[s].push((s, kappa_s + spec.tau * degree));
            }
        }
    }
    let q = SparseSymMatrix::from_columns(spec.dim(), cols_out)?;
    Ok(PrecisionModel::new(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightProfile {
    #[default]
    Uniform,
    /// `w(d) = 1 − d / (radius + 1)`.
    LinearDecay,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SiteSelection {
    /// Explicit `(row, col)` centres, duplicates allowed.
    List(Vec<(usize, usize)>),
    /// Fraction of all sites, drawn without replacement, in site order.
    Coverage(f64),
    /// Number of centres drawn uniformly with replacement, in draw order.
    Count(usize),
}

/// One instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct FootprintSpec {
    /// Disk radius in grid units; `0` is a point observation.
    pub radius: f64,
    pub profile: WeightProfile,
    pub noise_variance: f64,
    pub sites: SiteSelection,
    /// Processes the instrument sees; the row sums them over the footprint.
    pub processes: Vec<usize>,
}

impl FootprintSpec {
    pub fn point(noise_variance: f64, sites: SiteSelection) -> Self {
        FootprintSpec { radius: 0.0, profile: WeightProfile::Uniform, noise_variance, sites, processes: vec![0] }
    }
}

/// Lattice sites within Euclidean distance `radius` of `center`, with their
/// distances, in row-major order. Clipped at the grid boundary.
pub fn footprint_support(spec: &LatticeGMRFSpec, center: (usize, usize), radius: f64) -> Vec<(usize, usize, f64)> {
    let reach = libm::floor(radius) as i64;
    let mut out = Vec::new();
    for dr in -reach..=reach {
        for dc in -reach..=reach {
            let (r, c) = (center.0 as i64 + dr, center.1 as i64 + dc);
            if r < 0 || c < 0 || r as usize >= spec.rows || c as usize >= spec.cols {
                continue;
            }
            let d = libm::sqrt((dr * dr + dc * dc) as f64);
            if d <= radius {
                out.push((r as usize, c as usize, d));
            }
        }
    }
    out
}

pub fn make_observations(spec: &LatticeGMRFSpec, footprints: &[FootprintSpec], seed: u64) -> Result<ObservationSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_sites = spec.sites();
    let mut triplets = Vec::new();
    let mut noise = Vec::new();
    let mut locations = Vec::new();
    for fp in footprints {
        if !(fp.noise_variance > 0.0 && fp.noise_variance.is_finite()) {
            return Err(Error::InvalidSpec("noise variance must be positive"));
        }
        if !(fp.radius >= 0.0 && fp.radius.is_finite()) {
            return Err(Error::InvalidSpec("footprint radius must be non-negative"));
        }
        if fp.processes.is_empty() {
            return Err(Error::InvalidSpec("empty footprint: instrument sees no process"));
        }
        if fp.processes.iter().any(|&p| p >= spec.processes) {
            return Err(Error::InvalidSpec("instrument sees a process that does not exist"));
        }
        let centres: Vec<(usize, usize)> = match &fp.sites {
            SiteSelection::List(list) => {
                if list.iter().any(|&(r, c)| r >= spec.rows || c >= spec.cols) {
                    return Err(Error::InvalidSpec("footprint centre outside the grid"));
                }
                list.clone()
            }
            SiteSelection::Coverage(frac) => {
                if !(0.0..=1.0).contains(frac) {
                    return Err(Error::InvalidSpec("coverage must lie in [0, 1]"));
                }
                let k = libm::round(frac * n_sites as f64) as usize;
                let mut idx: Vec<usize> = (0..n_sites).collect();
                for i in 0..k {
                    let j = rng.gen_range(i..n_sites);
                    idx.swap(i, j);
                }
                let mut chosen = idx[..k].to_vec();
                chosen.sort_unstable();
                chosen.into_iter().map(|s| (s / spec.cols, s % spec.cols)).collect()
            }
            SiteSelection::Count(k) => (0..*k)
                .map(|_| {
                    let s = rng.gen_range(0..n_sites);
                    (s / spec.cols, s % spec.cols)
                })
                .collect(),
        };
        for centre in centres {
            let row = noise.len();
            let mut entries = Vec::new();
            for (r, c, d) in footprint_support(spec, centre, fp.radius) {
                let w = match fp.profile {
                    WeightProfile::Uniform => 1.0,
                    WeightProfile::LinearDecay => 1.0 - d / (fp.radius + 1.0),
                };
                for &p in &fp.processes {
                    entries.push((row, spec.state_index(p, r, c), w));
                }
            }
            triplets.extend(entries);
            noise.push(fp.noise_variance);
            locations.push([centre.1 as f64, centre.0 as f64]);
        }
    }
    let a = SparseIncidence::from_triplets(noise.len(), spec.dim(), &triplets)?;
    ObservationSet::new(a, Noise::Diagonal(DiagonalNoise::new(noise)?), Some(locations))
}

/// `Ξ`, `A`, `T` of the singular-`Σ` example and its `Σ*` to two decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleFixture {
    pub xi: DenseSymMatrix,
    pub a: IncidenceMatrix,
    pub t: DenseSymMatrix,
    pub expected_joint: DenseSymMatrix,
}

pub fn counterexample_fixture() -> CounterexampleFixture {
    let xi = DenseSymMatrix::from_rows(&[[1.0e6, 0.4e6], [0.4e6, 1.0e6]]).expect("symmetric");
    let a = IncidenceMatrix::from_rows(&[[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).expect("finite");
    let t = DenseSymMatrix::from_diagonal(&[1.0, 0.1, 0.1]).expect("finite");
    let expected_joint =
        DenseSymMatrix::from_rows(&[[0.17, 0.08, 0.08], [0.08, 0.09, -0.01], [0.08, -0.01, 0.09]]).expect("symmetric");
    CounterexampleFixture { xi, a, t, expected_joint }
}

/// The same fixture as a sparse model (`Q = Ξ⁻¹`) with diagonal noise and
/// three arbitrary locations.
pub fn counterexample_instance() -> (PrecisionModel, ObservationSet) {
    let fx = counterexample_fixture();
    let q = spd_inverse(&fx.xi, "Ξ").expect("positive definite");
    let q = SparseSymMatrix::from_dense(&q).expect("valid");
    let a = SparseIncidence::from_dense(&fx.a).expect("valid");
    let noise = Noise::Diagonal(DiagonalNoise::new(fx.t.diagonal()).expect("positive"));
    let obs = ObservationSet::new(a, noise, Some(vec![[0.0, 0.0], [-1.0, 0.0], [1.0, 0.0]])).expect("conforming");
    (PrecisionModel::new(q), obs)
}
