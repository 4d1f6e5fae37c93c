//! Shared error type for the whole library.

use thiserror::Error;

/// Errors produced by sampling, kernel construction, and the tests.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Matrix or vector dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Too few observations for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The sample carries no usable signal (e.g. all points coincide).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// The fitted null distribution has nonpositive mean or variance.
    #[error("degenerate null distribution: {0}")]
    DegenerateNull(String),

    /// Empirical covariance is singular or too ill-conditioned to invert.
    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
