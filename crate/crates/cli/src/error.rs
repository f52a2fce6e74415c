use thiserror::Error;

/// Failure of one invocation, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, missing settings or parameters outside their domain (exit 1).
    #[error("{0}")]
    Usage(String),
    /// Anything that goes wrong while running (exit 2).
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl From<ipr_rmt::Error> for CliError {
    fn from(e: ipr_rmt::Error) -> Self {
        match e {
            ipr_rmt::Error::Domain(_) => Self::Usage(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(format!("I/O error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Runtime(format!("CSV error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Runtime(format!("JSON error: {e}"))
    }
}
