use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configured capacity cap was exceeded. Loud by design: callers
    /// must opt into larger caps, never get silent approximations.
    #[error("capacity exceeded: {what} = {actual} is over the cap {cap}")]
    Capacity {
        what: &'static str,
        cap: u64,
        actual: u64,
    },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("undefined weight: complex has no top-dimensional faces")]
    EmptyComplex,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn capacity(what: &'static str, cap: u64, actual: u64) -> Self {
        Error::Capacity { what, cap, actual }
    }

    /// Exit code for the CLI contract: 0 pass, 1 fail, 2 inconclusive,
    /// 3 capacity, 64 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. } => 3,
            Error::InvalidInput(_) | Error::Parse { .. } | Error::EmptyComplex => 64,
            _ => 1,
        }
    }
}
