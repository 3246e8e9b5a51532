use thiserror::Error;

/// Errors raised by the linear algebra, update rules, learners and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("eigensolver did not converge within {sweeps} sweeps (matrix hash {hash:016x})")]
    NoConvergence { sweeps: usize, hash: u64 },

    #[error("function undefined at eigenvalue {0:e}")]
    Domain(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("measurement spectrum outside [0, 1]: eigenvalue {0:e}")]
    MeasurementOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical kernels, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
