use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vector has {got} entries but the graph has {expected} vertices")]
    Mismatch { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{location}: {message}")]
    Validation { location: String, message: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("no decomposition into parts of the admissible root set exists: {0}")]
    NoDecomposition(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn validation(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
