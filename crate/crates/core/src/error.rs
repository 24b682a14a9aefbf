use thiserror::Error;

/// Errors raised by the library and mapped onto CLI exit codes by the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed an argument that violates an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),
    /// An internal contract between pipeline stages was broken.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Bad experiment or model configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Non-finite or otherwise unusable numeric input.
    #[error("input error: {0}")]
    Input(String),
    /// Dataset file could not be parsed or validated.
    #[error("load error: {msg} at line {line}")]
    Load { line: usize, msg: String },
    /// Dataset is structurally unusable (e.g. empty after preprocessing).
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
