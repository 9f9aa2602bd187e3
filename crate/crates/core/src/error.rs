use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: estimated error {error:.3e} after {evaluations} evaluations")]
    Quadrature { error: f64, evaluations: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("time step {dt:.6e} exceeds the CFL bound {bound:.6e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("non-finite value at step {step} (t = {time})")]
    NonFinite { step: u64, time: f64 },

    #[error("steady state not reached after {steps} steps; last L1 rate {rate:.3e}")]
    SteadyStateNotReached { steps: u64, rate: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("malformed checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
