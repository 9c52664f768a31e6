use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum GrfError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point outside the unit cube: {0}")]
    OutOfDomain(String),

    #[error("kernel is measure-valued; use pairing operations")]
    MeasureValuedKernel,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("kernel not positive semidefinite at this truncation (diagonal {value:e} at index {index})")]
    NotPositiveSemidefinite { index: usize, value: f64 },

    #[error("size cap exceeded: {requested} entries > cap {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("degenerate base measure: total mass must be positive")]
    DegenerateBaseMeasure,

    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GrfError>;
