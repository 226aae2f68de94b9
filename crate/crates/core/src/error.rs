use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("dimension d = {0} is recurrent; the free Green's function diverges (need d >= 3)")]
    Recurrent(usize),

    #[error("kernel table covers lengths up to {available}, but K_max = {required} is required")]
    KernelTooShort { available: usize, required: usize },

    #[error("memory budget exceeded: {required} bytes required, {budget} bytes allowed")]
    MemoryBudget { required: u64, budget: u64 },

    #[error("vertex {0} is outside the configuration region")]
    OutOfRegion(String),

    #[error("finite-volume margin violated: {0}")]
    Margin(String),

    #[error("the query touches vertices outside the explored cluster: {0}")]
    Unexplored(String),

    #[error("local times have not been lifted for this loop sample")]
    MissingLocalTimes,

    #[error("path edge {edge} is not covered by any glued object")]
    Uncoverable { edge: String },

    #[error("invalid glued-loop sequence: {0}")]
    InvalidChain(String),

    #[error("endpoints are not connected through the given glued objects")]
    NotConnected,

    #[error("fragment exceeds exact-solver limits ({0}); use the sampling estimators instead")]
    LimitsExceeded(String),

    #[error("pathwise invariant violated on replica {replica}: {what}")]
    Pathwise { replica: u64, what: String },

    #[error("cannot fit exponent: {0}")]
    Fit(String),

    #[error("strict check failed: {0}")]
    StrictCheck(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
