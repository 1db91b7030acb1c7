use thiserror::Error;

/// Failure modes shared across the crate.
///
/// `InvalidArgument` covers precondition violations on user-supplied values
/// (nonpositive time scales, mismatched lengths, out-of-range nodes).
/// `Numerical` covers runtime breakdowns inside otherwise valid calls:
/// exhausted quadrature budgets, stagnated eigensolves, loss of positivity.
/// `MissingInput` is the CLI-facing variant for absent upstream artifacts.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> Error {
    Error::Numerical(msg.into())
}
