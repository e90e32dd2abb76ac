use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial degree {degree} exceeds supported maximum {max}")]
    UnsupportedDegree { degree: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("rejected: {0}")]
    Rejected(String),

    #[error("no ordered pair found after {attempts} attempts")]
    Exhausted { attempts: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
