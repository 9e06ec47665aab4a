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

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate doc_id `{0}`")]
    DuplicateDocId(String),

    #[error("invalid document `{doc_id}`: {reason}")]
    InvalidDocument { doc_id: String, reason: String },

    #[error("documents `{doc}` share an id but have authors `{author1}` and `{author2}`")]
    CorruptMetadata {
        doc: String,
        author1: String,
        author2: String,
    },

    #[error("quota for {category} cannot be satisfied: {reason}")]
    UnsatisfiableQuota { category: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("feature model is empty")]
    EmptyModel,

    #[error("training corpus is empty")]
    EmptyTrainingCorpus,

    #[error("impostor pool has {available} eligible candidates, {required} required")]
    PoolTooSmall { available: usize, required: usize },

    #[error("sample {index} (`{sample_id}`): {source}")]
    Sample {
        index: usize,
        sample_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("endpoint did not answer sample `{0}`")]
    MissingResponse(String),

    #[error("endpoint timed out after {0:?}")]
    Timeout(std::time::Duration),

    #[error("result sets do not cover the same samples: {0}")]
    MismatchedResults(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
