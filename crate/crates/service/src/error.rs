use std::process::ExitCode;

/// CLI failure, split by exit code: bad input (1) versus internal faults (2).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(1),
            CliError::Internal(_) => ExitCode::from(2),
        }
    }
}

impl From<corpusforge_core::Error> for CliError {
    fn from(e: corpusforge_core::Error) -> Self {
        match e {
            corpusforge_core::Error::NoConvergence(_) => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
