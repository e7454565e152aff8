use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("method id {id} out of range for a class with {len} methods")]
    Index { id: usize, len: usize },

    #[error("invalid weights: {0}")]
    Weight(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("corpus has no tokens")]
    EmptyCorpus,

    #[error("no vector for method {0}")]
    MissingMethod(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid class facts: {0}")]
    Facts(String),

    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("{n} methods is fewer than min_methods = {min}")]
    TooFewMethods { n: usize, min: usize },

    #[error("every method was classified as noise")]
    NoClusters,
}
