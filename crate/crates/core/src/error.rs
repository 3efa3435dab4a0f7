use thiserror::Error;

use crate::report::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),

    #[error("sort mismatch: {0}")]
    SortMismatch(String),

    #[error("unknown identifier `{0}`")]
    UnknownId(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("closure cap of {cap} entries exceeded ({entries} entries generated)")]
    CapExceeded { cap: usize, entries: usize },

    #[error("search budget of {0} steps exhausted")]
    BudgetExhausted(u64),

    #[error("search cancelled")]
    Cancelled,

    #[error("no suitable groupoid available: {0}")]
    NoGroupoid(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
