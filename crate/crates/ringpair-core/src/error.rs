use thiserror::Error;

/// Errors produced by the resonator engine.
///
/// The three variants map onto the CLI exit codes: validation errors (1),
/// invariant failures (2), and numerical errors such as poles or singular
/// solves (3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("numerical: {0}")]
    Numerical(String),

    #[error("invariant failure: {0}")]
    Invariant(String),

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn pole(msg: impl Into<String>) -> Self {
        Error::Pole(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
