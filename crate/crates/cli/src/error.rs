use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Syntax errors and unknown keys; the message carries line and column.
    #[error("config {origin}: {message}")]
    ConfigSyntax { origin: String, message: String },

    #[error("config field `{field}`: {reason}")]
    ConfigField { field: String, reason: String },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] compass_core::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub(crate) fn field_error(field: impl Into<String>, reason: impl std::fmt::Display) -> CliError {
    CliError::ConfigField {
        field: field.into(),
        reason: reason.to_string(),
    }
}
