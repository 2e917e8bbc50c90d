use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not conform.
    DimensionMismatch {
        op: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A matrix that must be non-singular is not; `rcond` is the reciprocal
    /// condition estimate of its symmetric factorization.
    Singular { what: &'static str, rcond: f64 },
    /// Non-positive pivot in a Cholesky factorization. `column` is in the
    /// factor (permuted) frame, `original` in the caller's frame.
    NotPositiveDefinite { column: usize, original: usize, pivot: f64 },
    /// A column with no stored diagonal.
    StructurallySingular { column: usize },
    /// Matrix entries that violate a structural invariant.
    InvalidMatrix(&'static str),
    NonFinite { what: &'static str },
    NotSymmetric { row: usize, col: usize },
    InvalidIndexSet(&'static str),
    InvalidPermutation(&'static str),
    /// Variance inputs that are negative, non-finite, or jointly zero.
    InvalidVariance { what: &'static str, value: f64 },
    /// The incidence matrix has a negative entry, so the zero-pattern
    /// argument for `AᵀA` does not hold.
    NegativeIncidence { row: usize, col: usize },
    /// The sparse path needs a diagonal observation-error variance.
    NonDiagonalNoise,
    /// A `Ξ_jk` needed by `diag(A Ξ Aᵀ)` was neither in the sparse subset
    /// nor among the supplied extra entries.
    MissingInverseEntry { row: usize, col: usize },
    /// Extra off-pattern entries were required for the updated precision.
    /// With non-negative `A` and diagonal `T` this cannot happen, so it
    /// signals a defect in the pattern bookkeeping.
    SparsityTheoremViolated { count: usize, first: (usize, usize) },
    InvalidSpec(&'static str),
    InvalidTransform,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { op, expected, found } => write!(
                f,
                "{op}: dimension mismatch, expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::Singular { what, rcond } => {
                write!(f, "{what} is singular (reciprocal condition estimate {rcond:e})")
            }
            Error::NotPositiveDefinite { column, original, pivot } => write!(
                f,
                "matrix is not positive definite: pivot {pivot:e} at factor column {column} (original index {original})"
            ),
            Error::StructurallySingular { column } => {
                write!(f, "column {column} has no stored diagonal entry")
            }
            Error::InvalidMatrix(msg) => write!(f, "invalid matrix: {msg}"),
            Error::NonFinite { what } => write!(f, "{what} contains non-finite values"),
            Error::NotSymmetric { row, col } => {
                write!(f, "matrix is not symmetric at ({row}, {col})")
            }
            Error::InvalidIndexSet(msg) => write!(f, "invalid index set: {msg}"),
            Error::InvalidPermutation(msg) => write!(f, "invalid permutation: {msg}"),
            Error::InvalidVariance { what, value } => write!(f, "invalid {what}: {value}"),
            Error::NegativeIncidence { row, col } => write!(
                f,
                "incidence matrix has a negative entry at ({row}, {col}); the sparse path requires A >= 0"
            ),
            Error::NonDiagonalNoise => {
                write!(f, "observation-error variance is not diagonal; use the dense path")
            }
            Error::MissingInverseEntry { row, col } => {
                write!(f, "inverse entry ({row}, {col}) required but not available")
            }
            Error::SparsityTheoremViolated { count, first } => write!(
                f,
                "{count} off-pattern entries of the updated covariance were required (first at ({}, {})); this is a pattern bookkeeping bug",
                first.0, first.1
            ),
            Error::InvalidSpec(msg) => write!(f, "invalid spec: {msg}"),
            Error::InvalidTransform => write!(f, "plot transform is not invertible"),
        }
    }
}

impl core::error::Error for Error {}
