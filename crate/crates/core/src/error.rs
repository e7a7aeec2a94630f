use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied parameter is outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Structured input (complex, diagram, file contents) violates an invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An operation was asked of a state that does not support it.
    #[error("invalid state: {0}")]
    InvalidState(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
