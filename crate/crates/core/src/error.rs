use thiserror::Error;

/// Failures raised by the simulation modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested Hilbert space exceeds the configured dimension limit.
    #[error("capacity error: Hilbert dimension {dim} exceeds limit {limit}")]
    Capacity { dim: usize, limit: usize },
    /// The operation has no model for the given spin system.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
