use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {x} is outside the support of `{family}` or has zero density")]
    Domain { family: String, x: f64 },

    #[error("derivative order {0} is not supported (expected 1..=6)")]
    UnsupportedOrder(usize),

    #[error("moment functional `{name}` did not converge: {reason}")]
    MomentDivergence { name: String, reason: String },

    #[error("information |a2| = {0:e} is too small to invert")]
    SingularInformation(f64),

    #[error("solver did not converge after {iterations} iterations (|score| = {score:e})")]
    NoConvergence { iterations: usize, score: f64 },

    #[error("inverse CDF failed at p = {p}")]
    InversionFailure { p: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid family definition: {0}")]
    Family(String),

    #[error("study aborted: {failures} of {attempted} replications failed at n = {n}")]
    StudyAborted {
        n: usize,
        failures: usize,
        attempted: usize,
    },

    #[error("density conditions failed: {0}")]
    ConditionsFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
