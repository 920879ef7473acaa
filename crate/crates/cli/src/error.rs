use thiserror::Error;

/// Failures of a CLI command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("integration failed: {0}")]
    Integration(#[from] twosystem_core::Error),
    #[error("oracle precondition not met: {0}")]
    Oracle(String),
    #[error("hard-coded and derived right-hand sides disagree: {0}")]
    Mismatch(String),
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Tolerance(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Oracle(_) => 4,
            CliError::Mismatch(_) => 5,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
