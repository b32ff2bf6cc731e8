use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("catastrophic cancellation: estimated relative error {relative_error:.3e} exceeds {limit:.1e}")]
    Cancellation { relative_error: f64, limit: f64 },

    #[error("sampler failed to reach acceptance window [{low}, {high}] after {rounds} adaptation rounds (last rate {last_rate:.4})")]
    Adaptation {
        low: f64,
        high: f64,
        rounds: usize,
        last_rate: f64,
    },

    #[error("Monte Carlo failure: {0}")]
    MonteCarlo(String),
}

pub type Result<T> = std::result::Result<T, Error>;
