use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition of the called operation does not hold.
    #[error("usage error: {0}")]
    Usage(String),
    /// An enumeration or construction exceeded a configured size cap.
    #[error("size cap exceeded: {what} (limit {limit})")]
    SizeCap { what: &'static str, limit: usize },
    /// The instance generator could not satisfy its contract.
    #[error("generation failed: {0}")]
    Generation(String),
    /// Malformed instance or flow file.
    #[error("parse error: {0}")]
    Parse(String),
    /// Two evaluation routes that must agree did not.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
