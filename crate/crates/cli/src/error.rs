use serde::Serialize;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] baryopt::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Unsupported(String),
}

/// Machine-readable error record printed on stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn report(&self) -> ErrorReport {
        let (kind, path) = match self {
            CliError::Config { path, .. } => ("config", Some(path.clone())),
            CliError::Io { path, .. } => ("io", Some(path.clone())),
            CliError::Core(_) => ("computation", None),
            CliError::Json(_) | CliError::Csv(_) => ("output", None),
            CliError::Unsupported(_) => ("unsupported", None),
        };
        ErrorReport { kind, path, message: self.to_string() }
    }
}
