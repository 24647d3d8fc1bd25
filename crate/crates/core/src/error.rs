use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is not strictly interior to the cone")]
    NotInterior,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("eigenvalues are not real (imaginary residual {max_imag:e})")]
    NonRealEigenvalues { max_imag: f64 },
    #[error("leading coefficient {0:e} is degenerate")]
    DegenerateLeadingCoefficient(f64),
    #[error("step polynomial is not strictly convex (a = {0:e})")]
    ConvexityViolation(f64),
    #[error("step t = {t:e} does not exceed the guaranteed lower bound {bound:e}")]
    StepBoundViolation { t: f64, bound: f64 },
    #[error("start point is not in the swath")]
    NotInSwath,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("instance invariant violated: {0}")]
    InvariantViolation(String),
    #[error("instance generation exhausted its retries")]
    RetryExhausted,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::DomainError(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
