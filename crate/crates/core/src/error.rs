//! Crate-wide error taxonomy.

/// Error type shared by all modules.
///
/// The three variants correspond to the three ways an operation can be
/// refused: the caller passed something out of contract, the operation is
/// not defined for the given representation (e.g. exact polygon distances
/// without vertex data), or an enumeration would exceed its configured cap.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
