use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// The log-normal variance density is not defined for a known variance.
    #[error("variance belief is degenerate (beta = 0); use the known-variance branch")]
    DegenerateVariance,

    /// Inputs are individually valid but do not fit together.
    #[error("usage error: {0}")]
    Usage(&'static str),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}
