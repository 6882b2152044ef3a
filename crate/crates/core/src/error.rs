use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error("invalid asset {name}: {message}")]
    Asset { name: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid feature mask: {0}")]
    Mask(String),

    #[error("cannot fit vectorizer on an empty training set")]
    EmptyVocabularyInput,

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite feature value at row {row}")]
    NonFinite { row: usize },

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("smote needs at least 2 minority rows, got {0}")]
    TooFewMinority(usize),

    #[error("cannot build {k} folds: class {class} has only {count} members")]
    ClassTooSmall {
        k: usize,
        class: &'static str,
        count: usize,
    },

    #[error("k must be at least 2, got {0}")]
    InvalidFoldCount(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("operation requires a random forest model, got {0}")]
    WrongModelKind(String),

    #[error("conversation {conversation_id}: no dense embedding but the emb family is active")]
    MissingEmbedding { conversation_id: String },

    #[error("unsupported model artifact version {0}")]
    ArtifactVersion(u32),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
