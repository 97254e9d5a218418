use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("row {row}: non-finite value in column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("trivial clustering: k = {k} with n = {n} (need 2 <= k <= n - 1)")]
    TrivialClustering { k: usize, n: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("coordinates required for {0}")]
    CoordinatesRequired(String),

    #[error("invalid distribution parameters: {0}")]
    InvalidParameters(String),

    #[error("unsupported model id {0} (expected 1..=9)")]
    UnsupportedModel(u8),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
