use std::path::{Path, PathBuf};

/// Errors that stop a command. All of them map to exit code 2; failed
/// checks are reported through the command result instead.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] peflow_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error("config hash mismatch: artifact has {found}, configuration hashes to {expected}")]
    HashMismatch { expected: String, found: String },
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn artifact(path: &Path, message: impl ToString) -> Self {
        CliError::Artifact { path: path.to_path_buf(), message: message.to_string() }
    }
}
