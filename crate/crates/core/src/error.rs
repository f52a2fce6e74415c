use thiserror::Error;

/// Errors raised by samplers, special functions and the experiment pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A result is not representable (integer overflow, unbounded inverse).
    #[error("range error: {0}")]
    Range(String),
    /// The inputs fall into a case the routine does not handle.
    #[error("unsupported case: {0}")]
    Unsupported(String),
    /// Internal consistency check failed (e.g. an unpaired complex eigenvalue).
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("insufficient data: needed at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    /// The dense eigensolver failed to converge or violated the residual contract.
    #[error("eigensolver failure: {0}")]
    Solver(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(format!($($arg)*))
    };
}
pub(crate) use domain;
