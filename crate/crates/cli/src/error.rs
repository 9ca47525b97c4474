use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("column `{column}` not found in {csv}")]
    MissingColumn { csv: PathBuf, column: String },

    #[error("experiment `{experiment}` failed")]
    ExperimentFailed {
        experiment: &'static str,
        #[source]
        source: isl_limits::Error,
    },

    #[error("{failed} validation check(s) failed")]
    ValidationFailed { failed: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Stable process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::UnknownExperiment(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config { path: path.into(), message: message.to_string() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
