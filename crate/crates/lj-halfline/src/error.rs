use thiserror::Error;

/// Crate-wide error type. The CLI maps variants to exit codes:
/// `InvalidParameter`/`Config` -> 2, `Unconverged`/`Numerical` -> 3,
/// verification failures are reported data, not errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {field}: {message}")]
    InvalidParameter { field: &'static str, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure in {context}: {message}")]
    Numerical { context: &'static str, message: String },

    #[error("not converged: {context}: {message}")]
    Unconverged { context: &'static str, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter { field, message: message.into() }
    }

    pub fn numerical(context: &'static str, message: impl Into<String>) -> Self {
        Error::Numerical { context, message: message.into() }
    }

    pub fn unconverged(context: &'static str, message: impl Into<String>) -> Self {
        Error::Unconverged { context, message: message.into() }
    }
}
