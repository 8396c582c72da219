//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("sample variant mismatch: expected {expected}, got {got}")]
    VariantMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("ergodicity violation: {0}")]
    Ergodicity(String),

    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),

    #[error("non-finite loss: {0}")]
    NonFiniteLoss(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
