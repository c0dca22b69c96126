use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported endpoint {0}: denominator is not a power of 3")]
    UnsupportedEndpoint(String),
    #[error("{what}: count {count} exceeds cap {cap}")]
    Resource {
        what: String,
        count: String,
        cap: u64,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, count: impl ToString, cap: u64) -> Self {
        Error::Resource {
            what: what.into(),
            count: count.to_string(),
            cap,
        }
    }
}
