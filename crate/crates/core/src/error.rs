use thiserror::Error;

use crate::neural::NeuralError;
use crate::pareto::ParetoError;
use crate::problems::ProblemError;
use crate::rl::RlError;

/// Top-level error for the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Pareto(#[from] ParetoError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
