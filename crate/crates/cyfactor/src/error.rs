use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("operator validation failed: {0}")]
    Validation(String),

    #[error("division by (p-adic) zero")]
    DivisionByZero,

    #[error("insufficient p-adic accuracy: have {have}, need {need} ({context})")]
    Accuracy {
        have: i64,
        need: i64,
        context: String,
    },

    #[error("singular prime p={p}: {message}")]
    SingularPrime { p: u64, message: String },

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
