use thiserror::Error;

/// Errors produced by the numerical kernels, models and harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or configuration was constructed with invalid parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Textual input (severity spec, config file, CSV) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// An iterative method stopped before meeting its tolerance.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// An interpolation produced an invalid intermediate value.
    #[error("internal error in branch {branch}: {message}")]
    Internal { branch: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
