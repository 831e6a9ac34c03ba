use thiserror::Error;

/// Errors surfaced by every layer of the simulator.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    /// A value of the right shape was used where a different variant is required,
    /// e.g. a 4G SNID handed to a 5G derivation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("unsupported scheme: {0}")]
    UnsupportedScheme(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("sequence number space exhausted for {0}")]
    SqnExhausted(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("unavailable: {0}")]
    Unavailable(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
