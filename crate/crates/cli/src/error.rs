use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag combinations not caught by the argument parser.
    #[error("usage: {0}")]
    Usage(String),
    /// The computation refused its inputs or failed a check.
    #[error("{0}")]
    Rejected(String),
    #[error(transparent)]
    Core(#[from] nisqbound_core::Error),
    #[error(transparent)]
    Oracle(#[from] nisqbound_oracle::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
