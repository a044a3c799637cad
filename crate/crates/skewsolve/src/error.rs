//! Error type shared across the library.
//!
//! Three observable failure classes map onto CLI exit codes:
//! contract/validation errors (exit 2), resource-guard errors (exit 3),
//! and numerical failures (exit 2; they indicate bad inputs at desk scale).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Precondition or data-contract violation (bad dimensions, invalid
    /// gate, malformed schema, out-of-range parameter).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A desk-scale resource guard was exceeded (statevector or unitary
    /// width limits).
    #[error("resource guard: {0}")]
    Resource(String),

    /// Numerical routine failed to converge or produced non-finite output.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// JSON (de)serialization failure, with line/column context from the
    /// underlying parser.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) => 3,
            _ => 2,
        }
    }
}
