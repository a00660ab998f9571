use thiserror::Error;

/// Errors produced while building codes, parsing files or counting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("permutation error: {0}")]
    Permutation(String),

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not prime")]
    NotPrime(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("alist line {line}: {message}")]
    Alist { line: usize, message: String },

    #[error("spec file line {line}: {message}")]
    SpecFile { line: usize, message: String },

    #[error("matrix is not in banded tailbiting form: {0}")]
    NotBanded(String),

    #[error("unsupported structure: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
