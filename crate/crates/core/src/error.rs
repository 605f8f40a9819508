use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("training length {length} is shorter than the number of nodes {nodes}")]
    TrainingTooShort { length: usize, nodes: usize },

    #[error("training matrix is rank deficient")]
    RankDeficient,

    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("{subcarriers} subcarriers cannot hold {pilots} equispaced pilots")]
    NonIntegralSpacing { subcarriers: usize, pilots: usize },

    #[error("epsilon = {epsilon} needs at least {required} trials, got {trials}")]
    InsufficientTrials {
        epsilon: f64,
        required: usize,
        trials: usize,
    },

    #[error("bisection did not converge: {0}")]
    NoConvergence(String),

    #[error("no feasible range: {0}")]
    NoFeasibleRange(String),

    #[error("outside model validity: {0}")]
    OutsideValidity(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("malformed configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
