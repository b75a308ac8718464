use thiserror::Error;

/// Errors raised by library operations.
///
/// Numerical payloads are widened to `f64` so the error type does not carry
/// the scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("kernel ordering L <= K violated (most negative eigenvalue of K - L: {min_eigenvalue:e})")]
    OrderingViolation { min_eigenvalue: f64 },

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("theorem check failed: {0}")]
    TheoremViolation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! dim_err {
    ($($arg:tt)*) => { $crate::error::Error::Dimension(format!($($arg)*)) };
}

macro_rules! domain_err {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}

pub(crate) use dim_err;
pub(crate) use domain_err;
