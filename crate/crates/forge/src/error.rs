use std::path::PathBuf;

use calabi_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum ForgeError {
    #[error("config error at line {line}, column {column}: {message}")]
    ConfigSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Hypothesis(CoreError),
    #[error(transparent)]
    Core(CoreError),
    #[error("tolerance failure: {0}")]
    Tolerance(String),
}

impl From<CoreError> for ForgeError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotNullHomotopic { .. }
            | CoreError::UnbalancedWeights { .. }
            | CoreError::RequirementsNotMet(_) => ForgeError::Hypothesis(e),
            other => ForgeError::Core(other),
        }
    }
}

impl ForgeError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ForgeError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 hypothesis violation, 3 numerical failure, 4 config or IO error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ForgeError::Hypothesis(_) => 2,
            ForgeError::Core(_) | ForgeError::Tolerance(_) => 3,
            ForgeError::ConfigSyntax { .. }
            | ForgeError::Config(_)
            | ForgeError::Io { .. }
            | ForgeError::Csv(_)
            | ForgeError::Json(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, ForgeError>;
