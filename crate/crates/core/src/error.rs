use thiserror::Error;

/// Errors raised when an input is rejected or a computation cannot be certified.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("system size {n} exceeds the enumeration cap of {cap} spins")]
    EnumerationCap { n: usize, cap: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("energy {e_c} is below the ground energy {ground}; cannot certify")]
    Uncertifiable { e_c: f64, ground: f64 },

    #[error("instance file: {0}")]
    Format(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
