use thiserror::Error;

/// Unified error type for the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a documented precondition (dimension mismatch,
    /// out-of-range argument, step after episode end, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A configuration value is invalid or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A structured text file could not be parsed; `line` is 1-based.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// A checkpoint or model file exists but does not match what the caller
    /// expects (bad magic, version, or architecture shape).
    #[error("load error: {0}")]
    Load(String),

    /// A numeric invariant broke at runtime (NaN/inf in a loss or gradient).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An evaluation report could not be produced.
    #[error("report error: {0}")]
    Report(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
