use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter was NaN, infinite, or otherwise malformed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter was well-formed but outside the model's domain (e.g. T <= 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// A length or ring size is outside the enumerable range.
    #[error("size error: {0}")]
    Size(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    /// A row-level invariant failed while writing output.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
