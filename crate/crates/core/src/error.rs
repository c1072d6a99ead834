use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A point expected on the unit sphere is not normalised.
    #[error("point {index} has norm {norm}, expected 1")]
    NotNormalized { index: usize, norm: f64 },

    /// The consistency polytope has no strictly interior point.
    #[error("version space is empty or has no interior: {0}")]
    Infeasible(String),

    /// The hit-and-run walk stopped moving.
    #[error("sampler stuck: chord length below {threshold:e} for {steps} consecutive steps")]
    StuckWalk { threshold: f64, steps: usize },

    /// Rejection sampler acceptance fell below the configured floor.
    #[error("sampler acceptance rate {rate:e} below floor {floor:e}")]
    LowAcceptance { rate: f64, floor: f64 },

    /// Gradient descent produced a non-finite loss.
    #[error("training diverged at iteration {0}")]
    Divergence(usize),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
