use thiserror::Error;

/// Failure of a CLI command, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid configuration. Exit code 1.
    #[error("configuration error: {0}")]
    Config(String),
    /// Anything that went wrong after the configuration was accepted,
    /// including failed verification checks. Exit code 2.
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<raq_prep_core::Error> for CliError {
    fn from(e: raq_prep_core::Error) -> Self {
        use raq_prep_core::Error as E;
        match e {
            E::InvalidConfig(_) | E::EmptyPool | E::InfeasibleGraph { .. } | E::QubitCap { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
