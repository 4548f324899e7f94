use thiserror::Error;

use crate::quad::QuadResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {0} lies inside the branch-point exclusion zone")]
    BranchPoint(f64),

    #[error("argument outside the domain of validity: {0}")]
    Domain(String),

    #[error("quadrature did not converge ({context}): best estimate {best:?}")]
    NonConvergence { context: String, best: QuadResult },

    #[error("no sign change of the function over [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Best available estimate carried by a quadrature failure.
    pub fn best_estimate(&self) -> Option<QuadResult> {
        match self {
            Error::NonConvergence { best, .. } => Some(*best),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
