use crate::randgen::Seed;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The inputs lie outside the hypotheses of the requested bound.
    #[error("outside hypothesis: {0}")]
    OutOfHypothesis(String),

    #[error("replication {index} failed (seed {seed}): {source}")]
    ReplicationFailure {
        index: u64,
        seed: Seed,
        #[source]
        source: Box<Error>,
    },

    /// A pathwise inequality was violated; `seed` reproduces the offending draw.
    #[error("pathwise violation at replication {index} (seed {seed}): {detail}")]
    PathwiseViolation {
        index: u64,
        seed: Seed,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
