use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input; `path` is the JSON field path when known.
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    /// A table or distribution violates a model invariant.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("stage {stage} out of range (horizon {horizon})")]
    StageOutOfRange { stage: usize, horizon: usize },

    /// Enumeration would exceed the configured cap.
    #[error("game too large for oracle: {what} needs {size} but cap is {cap}")]
    TooLarge { what: String, size: u128, cap: u128 },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
