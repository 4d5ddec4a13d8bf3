use thiserror::Error;

/// Errors produced by compoundkit operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input violates a mathematical precondition (shape, range, ordering).
    #[error("domain error: {0}")]
    Domain(String),

    /// A size cap would be exceeded.
    #[error("resource error: {what} requires {required}, limit is {allowed}")]
    Resource {
        what: String,
        required: u128,
        allowed: u128,
    },

    /// Numerical failure: non-finite state, eigensolver breakdown, cross-check gap.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Input matrix too ill-conditioned for the requested operation.
    #[error("conditioning error: condition estimate {estimate:.3e} exceeds {limit:.1e}")]
    Conditioning { estimate: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, required: u128, allowed: u128) -> Self {
        Error::Resource {
            what: what.into(),
            required,
            allowed,
        }
    }
}
