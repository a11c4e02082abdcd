use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("pair index {index} out of range for {count} pairs")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerology index {0} out of range (expected 0..=4)")]
    InvalidNumerology(u32),

    #[error("unknown access scheme `{0}`")]
    UnknownScheme(String),

    #[error("malformed record at line {line}: {reason}")]
    Record { line: usize, reason: String },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}
