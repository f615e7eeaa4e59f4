use crate::config::ConfigError;
use crate::output::OutputError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("numerical failure: {0}")]
    Model(#[from] combcavity_core::Error),
    #[error("output error: {0}")]
    Output(#[from] OutputError),
    #[error("acceptance metrics missed: {}", .0.join("; "))]
    CheckFailed(Vec<String>),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Argument(_) => 2,
            CliError::Model(
                combcavity_core::Error::InvalidSpec { .. } | combcavity_core::Error::InvalidIndex,
            ) => 2,
            CliError::Model(_) => 3,
            CliError::CheckFailed(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
