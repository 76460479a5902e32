use std::path::PathBuf;

/// Errors produced by the library and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("value {value} outside encoder range [{min}, {max}]")]
    Range { value: f64, min: f64, max: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("stream error: {0}")]
    Stream(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code for the command-line harness: 1 for validation
    /// failures (bad configuration or arguments), 2 for data failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Evaluation(_) => 1,
            Error::Dimension { .. }
            | Error::Input(_)
            | Error::Range { .. }
            | Error::Stream(_)
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::Json { .. } => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
