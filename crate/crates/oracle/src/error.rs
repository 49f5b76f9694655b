use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{n} qubits exceeds the simulation cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("reference state is singular (smallest eigenvalue {min_eigenvalue:e})")]
    Singular { min_eigenvalue: f64 },

    #[error("integration unstable: trace drift {drift:e} at t = {time}; retry with dt <= {suggested_dt}")]
    Unstable { drift: f64, time: f64, suggested_dt: f64 },

    #[error(transparent)]
    Core(#[from] nisqbound_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    if n == 0 {
        return Err(invalid("register has no qubits"));
    }
    Ok(())
}
