use std::io;
use std::path::PathBuf;

use medalplot_core::Error as CoreError;

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    BoundViolation = 1,
    InputError = 2,
    NumericalFailure = 3,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        CliError::Parse { path: path.into(), line, msg: msg.into() }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn status(&self) -> Status {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Input(_) => Status::InputError,
            CliError::Core(e) => match e {
                CoreError::Singular { .. }
                | CoreError::NotPositiveDefinite { .. }
                | CoreError::StructurallySingular { .. }
                | CoreError::NonFinite { .. }
                | CoreError::MissingInverseEntry { .. }
                | CoreError::SparsityTheoremViolated { .. } => Status::NumericalFailure,
                _ => Status::InputError,
            },
        }
    }

    /// Remediation advice for theorem-precondition failures.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Core(CoreError::NegativeIncidence { .. }) => {
                Some("the sparse path needs a non-negative A; rerun with --mode dense")
            }
            CliError::Core(CoreError::NonDiagonalNoise) => {
                Some("the sparse path needs a diagonal T; rerun with --mode dense or --mode auto")
            }
            CliError::Core(CoreError::Singular { .. }) => {
                Some("Σ + T must be non-singular; check that T is positive definite")
            }
            CliError::Core(CoreError::NotPositiveDefinite { .. }) => Some("Q must be symmetric positive definite"),
            _ => None,
        }
    }
}
