use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A weight family produced a non-finite log-weight.
    #[error("weight family {family} has non-finite log-weight {value} at k = {k}")]
    FamilyDomain { family: String, k: u64, value: f64 },

    /// A precondition of an operation failed; `index` names the first
    /// offending position when there is one.
    #[error("precondition failed: {reason}")]
    Precondition { reason: String, index: Option<u64> },

    #[error("sequence is not strictly increasing at position {position}: {previous} then {next}")]
    NotIncreasing {
        position: usize,
        previous: u64,
        next: u64,
    },

    #[error("invalid shift parameters: {0}")]
    InvalidParameters(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn precondition(reason: impl Into<String>) -> Self {
        Error::Precondition {
            reason: reason.into(),
            index: None,
        }
    }

    pub(crate) fn precondition_at(reason: impl Into<String>, index: u64) -> Self {
        Error::Precondition {
            reason: reason.into(),
            index: Some(index),
        }
    }
}
