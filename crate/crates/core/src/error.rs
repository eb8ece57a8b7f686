use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: field `{field}`: {reason}")]
    Record {
        line: usize,
        field: String,
        reason: String,
    },

    #[error("duplicate comment_id `{id}` at lines {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },

    #[error("matrix: {0}")]
    Matrix(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not enough {side} users: need {needed}, have {available}")]
    InsufficientUsers {
        side: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("class {class} has {size} members, fewer than the {folds} folds requested")]
    ClassTooSmall {
        class: usize,
        size: usize,
        folds: usize,
    },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("rank {rank} exceeds the smaller matrix dimension {max}")]
    InvalidRank { rank: usize, max: usize },

    #[error("maximal clique count for `{node}` exceeded the budget of {budget}")]
    CliqueBudget { node: String, budget: u64 },

    #[error("feature registry: {0}")]
    Registry(String),

    #[error("model: {0}")]
    Model(String),

    #[error("unknown user `{0}`")]
    UnknownUser(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Input or configuration problems, as opposed to failures while running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Record { .. }
                | Error::DuplicateId { .. }
                | Error::Matrix(_)
                | Error::Config(_)
                | Error::NonFinite
                | Error::InvalidRank { .. }
                | Error::Registry(_)
                | Error::Csv(_)
        )
    }
}
