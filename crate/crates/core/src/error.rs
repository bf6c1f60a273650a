use thiserror::Error;

/// Errors raised by the library. Variants follow the failure classes exposed
/// to the command line: bad input, bad configuration, misuse, and numerical
/// breakdown.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input outside domain: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
