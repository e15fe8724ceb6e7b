use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("orbit escaped radius {radius} after {steps} step(s)")]
    Escape { steps: usize, radius: f64 },

    #[error("first-return composition escaped at stage {stage} ({what})")]
    StageEscape { stage: usize, what: &'static str },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular Jacobian in {0}")]
    Singular(&'static str),

    #[error("continuation step fell below {min_step:e}")]
    StepUnderflow { min_step: f64 },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
