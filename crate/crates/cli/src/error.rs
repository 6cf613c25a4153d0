use std::path::PathBuf;

use thiserror::Error;

/// Exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Validation = 1,
    Numerical = 2,
    Assertion = 3,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },
    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },
    #[error("config [{section}] {key}: {message}")]
    ConfigValue {
        section: String,
        key: String,
        message: String,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{0}")]
    Core(#[from] tailwave_core::Error),
    #[error("verification failed: {0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            CliError::Core(e) if e.is_numerical() => ExitStatus::Numerical,
            CliError::Assertion(_) => ExitStatus::Assertion,
            _ => ExitStatus::Validation,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
