//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Configuration field out of range; the message names the field.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Vocabulary construction or lookup failure.
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),

    /// A corpus or fixture contained a token outside the vocabulary.
    #[error("unknown token {token:?} at line {line}")]
    UnknownToken { token: String, line: usize },

    /// A scorer state was passed to a model that did not create it.
    #[error("scorer state does not belong to this model")]
    StateMismatch,

    /// A model produced a distribution violating its contract.
    #[error("malformed model distribution: {0}")]
    ModelContract(String),

    /// Model construction failure (bad parameters or fixture).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A source sequence referenced tokens the model's vocabulary lacks.
    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),

    /// Corpus-level decode failure, tagged with the 0-based sentence index.
    #[error("sentence {index}: {source}")]
    Sentence {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Exhaustive enumeration would exceed the safety bound.
    #[error("exhaustive search too large: ({vocab_size} - 1)^{cap} exceeds {limit}")]
    SearchTooLarge {
        vocab_size: usize,
        cap: usize,
        limit: u64,
    },

    /// Metrics were requested over an empty trace.
    #[error("empty decode trace")]
    EmptyTrace,

    /// Run comparison over lists of different length.
    #[error("run length mismatch: baseline has {baseline} sentences, other has {other}")]
    RunLengthMismatch { baseline: usize, other: usize },

    /// Experiment definition problems (missing inputs, bad sweep values).
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
