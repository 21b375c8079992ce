use thiserror::Error;

use crate::transform::GridField;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("points per axis must be odd and at least 3, got {0}")]
    InvalidPoints(usize),

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("frequency {frequency:?} lies outside the stored box of radius {radius}")]
    OutsideBox { frequency: Vec<i64>, radius: usize },

    #[error("symbol `{name}` is not finite at {frequency:?}")]
    NonFiniteSymbol { name: String, frequency: Vec<i64> },

    #[error(
        "power iteration did not converge in {iterations} iterations (last estimate {estimate})"
    )]
    PowerIterationNotConverged {
        iterations: usize,
        estimate: f64,
        last_iterate: Box<GridField>,
    },

    #[error(
        "conjugate gradient did not converge in {iterations} iterations (residual {residual})"
    )]
    CgNotConverged {
        iterations: usize,
        residual: f64,
        last_iterate: Box<GridField>,
    },

    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("box radius {available} is too small, radius {required} is required")]
    BoxTooSmall { required: usize, available: usize },

    #[error(
        "insufficient resolution: tail bound needs truncation N = {required}, stored box radius is {available}"
    )]
    InsufficientResolution { required: u64, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed field document: {0}")]
    Json(#[from] serde_json::Error),
}
