use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("record {id}: response is empty")]
    EmptyResponse { id: String },

    #[error("record {id}: context turn {turn} is empty")]
    EmptyContextTurn { id: String, turn: usize },

    #[error("duplicate record id {id}")]
    DuplicateId { id: String },

    #[error("record {id} has no label")]
    Unlabeled { id: String },

    #[error("record {id} has source {found}, corpus source is {expected}")]
    SourceMismatch {
        id: String,
        expected: String,
        found: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("budget {budget} cannot hold {overhead} framing tokens plus one response token (minimum {minimum})")]
    BudgetTooSmall {
        budget: usize,
        overhead: usize,
        minimum: usize,
    },

    #[error("record {id}: {source}")]
    Record {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("{set} entry {index} has no label")]
    UnlabeledEntry { set: &'static str, index: usize },

    #[error("{set} entry {index} has length {len}, exceeding budget {budget}")]
    OverBudget {
        set: &'static str,
        index: usize,
        len: usize,
        budget: usize,
    },

    #[error("token id {token} outside vocabulary of size {vocab}")]
    VocabularyMismatch { token: u32, vocab: usize },

    #[error("expected width {expected}, got {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} predictions vs {right} gold labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("unknown encoder id {0:?}")]
    UnknownEncoder(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("tokenizer: {0}")]
    Tokenizer(String),

    #[error(transparent)]
    Tensor(#[from] candle_core::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn for_record(self, id: &str) -> Self {
        Error::Record {
            id: id.to_string(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by the input data rather than configuration or runtime failures.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::EmptyResponse { .. }
                | Error::EmptyContextTurn { .. }
                | Error::DuplicateId { .. }
                | Error::Unlabeled { .. }
                | Error::SourceMismatch { .. }
                | Error::Record { .. }
                | Error::EmptyTrainingSet
                | Error::UnlabeledEntry { .. }
                | Error::OverBudget { .. }
                | Error::LengthMismatch { .. }
                | Error::Json(_)
        )
    }
}
