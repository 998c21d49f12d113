use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("missing parameter {0}")]
    MissingParameter(String),

    #[error("polynomial is not homogeneous")]
    NotHomogeneous,

    #[error("degenerate scaling factor {0}")]
    DegenerateScaling(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
