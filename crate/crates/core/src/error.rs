use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unknown corpus id `{0}`")]
    UnknownCorpus(String),

    #[error("corpus `{0}` has not been ingested")]
    CorpusAbsent(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown concept `{0}`")]
    UnknownConcept(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("single-class labels: {0}")]
    SingleClass(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no burn-in year satisfies cv < {tolerance}; widen the tolerance")]
    NoBurnInYear { tolerance: f64 },

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("missing upstream artifact: {0}")]
    MissingArtifact(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
