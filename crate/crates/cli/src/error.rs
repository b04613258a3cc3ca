use eoq_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Core(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Fit(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Io(_) | CliError::Core(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::FitNonConvergence { .. } | CoreError::DegenerateData(_) => CliError::Fit(e.to_string()),
            CoreError::InvalidGrid(_)
            | CoreError::InvalidFrame(_)
            | CoreError::NoRoute(_)
            | CoreError::UnreachableExchange { .. }
            | CoreError::InvalidArgument(_) => CliError::Config(e.to_string()),
            other => CliError::Core(other),
        }
    }
}
