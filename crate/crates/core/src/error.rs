use thiserror::Error;

/// Errors raised by the core library.
///
/// Variants are grouped so callers can tell bad input apart from a numerical
/// breakdown during time stepping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures that happened while integrating, as opposed to
    /// rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
