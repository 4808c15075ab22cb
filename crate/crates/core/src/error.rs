use thiserror::Error;

/// Errors raised by the numerical core and the command-line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid measure component: {0}")]
    InvalidComponent(String),
    #[error("invalid triplet: {0}")]
    InvalidTriplet(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("representation error: {0}")]
    Representation(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
