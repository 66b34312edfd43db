use thiserror::Error;

/// Failures of a command, mapped to exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration (exit 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// Computation failed (exit 1).
    #[error(transparent)]
    Core(#[from] phasefield_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn from_config(e: phasefield_core::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
