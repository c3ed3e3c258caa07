use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input")]
    EmptyInput,

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("spectral parameter must have Im z > 0, got {0}")]
    NotUpperHalfPlane(f64),

    #[error("entry law {0} has infinite variance; this operation requires E(b^2) < inf")]
    InfiniteVariance(String),

    #[error("moment of order {order} is not available for {law}")]
    MissingMoment { law: String, order: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("path length {0} exceeds the enumeration guard of {max}", max = crate::pathmoments::MAX_PATH_LENGTH)]
    PathGuard(usize),

    #[error("invalid lattice path: {0}")]
    InvalidPath(String),

    #[error("weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("quantile function is not monotone near u = {0}")]
    NonMonotoneQuantile(f64),

    #[error("quantile window search failed: {0}")]
    WindowSearch(String),

    #[error("negative density {density} at x = {x}")]
    NegativeDensity { x: f64, density: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}
