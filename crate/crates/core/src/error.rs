use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown room symbol {0:?}")]
    UnknownSymbol(String),

    #[error("malformed map document: {0}")]
    MalformedDocument(String),

    #[error("invalid topology in act {act}: {reason}")]
    InvalidTopology { act: u8, reason: String },

    #[error("path does not match act {act} map: {reason}")]
    PathMismatch { act: u8, reason: String },

    #[error("{matches} node sequences match the logged path in act {act}")]
    AmbiguousPath { act: u8, matches: u64 },

    #[error("run path is empty")]
    EmptyPath,

    #[error("invalid run record: {0}")]
    InvalidRecord(String),

    #[error("infeasible generator parameters: {0}")]
    InfeasibleParams(String),

    #[error("invalid probability table {name}: {reason}")]
    InvalidTable { name: String, reason: String },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("choice set is empty")]
    EmptyChoiceSet,

    #[error("played entropy {played} outside [{min}, {max}]")]
    OutOfRange { played: f64, min: f64, max: f64 },

    #[error("path length must be at least 1")]
    ZeroLength,

    #[error("map seed {map_seed:?} does not match run seed {run_seed:?}")]
    SeedMismatch { map_seed: String, run_seed: String },

    #[error("no map available for seed {0:?}")]
    MissingMap(String),

    #[error("need at least two observations per sample (got {n_a} and {n_b})")]
    InsufficientSample { n_a: usize, n_b: usize },

    #[error("both samples have zero variance but different means ({mean_a} vs {mean_b})")]
    DegenerateVariance { mean_a: f64, mean_b: f64 },

    #[error("group {0} is empty")]
    EmptyGroup(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn topology(act: u8, reason: impl Into<String>) -> Self {
        Error::InvalidTopology {
            act,
            reason: reason.into(),
        }
    }

    pub(crate) fn mismatch(act: u8, reason: impl Into<String>) -> Self {
        Error::PathMismatch {
            act,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
