use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("capacity exceeded: dimension {dimension} is above the cap {cap}")]
    Capacity { dimension: usize, cap: usize },

    #[error("degenerate ground state: E1 - E0 = {splitting:e} below tolerance {tolerance:e}")]
    DegenerateGroundState { splitting: f64, tolerance: f64 },

    #[error("gapless: {0}")]
    Gapless(String),

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    #[error("stability: {0}")]
    Stability(String),

    #[error("fit: {0}")]
    Fit(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("serialization: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Process exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Capacity { .. } => 3,
            _ => 1,
        }
    }
}
