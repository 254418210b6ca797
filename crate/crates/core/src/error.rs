use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum SteinError {
    /// Text spec could not be parsed; `pos` is a byte offset into the input.
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// A parameter lies outside its stated domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation is undefined for the given law (zero mean, zero variance, ...).
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A numerical routine could not reach the requested tolerance.
    #[error("numerics: {msg} (achieved error {achieved:.3e})")]
    Tolerance { msg: String, achieved: f64 },
}

impl SteinError {
    pub fn domain(msg: impl Into<String>) -> Self {
        SteinError::Domain(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        SteinError::Unsupported(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SteinError>;
