use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular (no usable pivot in column {column})")]
    SingularMatrix { column: usize },

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("insufficient SNR grid: {0}")]
    InsufficientGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("trial {trial}: numeric failure persisted after {attempts} channel resamples")]
    ResampleLimit { trial: u64, attempts: u32 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
