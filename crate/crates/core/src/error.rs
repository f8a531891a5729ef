use thiserror::Error;

/// Errors raised by the barrier pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {x} lies outside the process domain ({lo}, {hi})")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("stability bound violated: {0}")]
    Stability(String),

    #[error("measures are not in balayage order: min margin {min_margin:.3e} at x = {argmin}")]
    Balayage { min_margin: f64, argmin: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 for a balayage failure, 3 for a stability violation, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Balayage { .. } => 2,
            Error::Stability(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
