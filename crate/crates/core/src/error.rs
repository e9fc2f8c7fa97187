use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside the feasible box, or an input is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numeric parameter is out of range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// The requested work exceeds a configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// The oracle does not provide the requested channel.
    #[error("capability error: {0}")]
    Capability(String),
    /// Malformed grid table input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn parameter<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
