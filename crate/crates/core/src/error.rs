use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix size {0} exceeds the configured cap of {1}")]
    TooLarge(usize, usize),

    #[error("not a valid quantum state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical convergence failure: {0}")]
    Convergence(String),

    #[error("conditioning on an outcome with probability {0:e}")]
    Conditioning(f64),
}

impl Error {
    /// True when the error reflects a numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence(_) | Error::Conditioning(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
