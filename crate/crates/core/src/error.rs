use thiserror::Error;

/// Errors raised by the geometry, sampling, quadrature and statistics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {index} has coordinate {value} outside [0, 1]")]
    CoordinateOutOfRange { index: usize, value: f64 },

    #[error("point {index} coincides with the origin")]
    OriginPoint { index: usize },

    #[error("points {first} and {second} coincide; samples must hold distinct points")]
    DuplicatePoint { first: usize, second: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported dimension {dimension}: need at least {minimum}")]
    UnsupportedDimension { dimension: usize, minimum: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("integrand returned {value} at {point:?}")]
    IntegrationFailure { point: Vec<f64>, value: f64 },

    #[error("discarded measure fraction {fraction} exceeds the 1e-3 validity limit")]
    DiscardedMeasure { fraction: f64 },

    #[error("value {value} at position {index} is not positive; cannot take its logarithm")]
    LogDomain { index: usize, value: f64 },

    #[error("need at least {needed} observations, found {found}")]
    InsufficientData { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
