use std::path::PathBuf;

use regvar_core::Error as CoreError;

/// Process exit statuses, one per failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Runtime = 1,
    Config = 2,
    NonConvergent = 3,
    Trivial = 4,
    EmptyAnchors = 5,
    Infeasible = 6,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            CliError::Config(_) | CliError::Csv { .. } => ExitStatus::Config,
            CliError::Core(CoreError::InvalidInput(_)) => ExitStatus::Config,
            CliError::Core(CoreError::NonConvergent(_)) => ExitStatus::NonConvergent,
            CliError::Core(CoreError::Trivial(_)) => ExitStatus::Trivial,
            CliError::Core(CoreError::EmptyAnchors { .. }) => ExitStatus::EmptyAnchors,
            CliError::Core(CoreError::NoBracket { .. }) => ExitStatus::Infeasible,
            _ => ExitStatus::Runtime,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
