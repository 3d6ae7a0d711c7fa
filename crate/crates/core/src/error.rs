use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    CorpusLine { line: usize, message: String },

    #[error("duplicate doc_id {0:?}")]
    DuplicateDocId(String),

    #[error("invalid article {doc_id:?}: {reason}")]
    InvalidArticle { doc_id: String, reason: String },

    #[error("author index {index} out of range (index has {len} authors)")]
    AuthorOutOfRange { index: usize, len: usize },

    #[error("query is empty after tokenization")]
    EmptyQuery,

    #[error("no query token is in the index vocabulary")]
    EmptyRepresentation,

    #[error("embeddings line {line}: {message}")]
    EmbeddingParse { line: usize, message: String },

    #[error("transport cost matrix contains a non-finite entry")]
    NonFiniteCost,

    #[error("invalid transport problem: {0}")]
    InvalidTransport(String),

    #[error("transport solver did not converge after {iterations} pivots")]
    SolverNonConvergence { iterations: usize },

    #[error("regime {0} is not available in this index")]
    RegimeUnavailable(String),

    #[error("embeddings required for the wmd regime")]
    EmbeddingsRequired,

    #[error("ranking has no candidates")]
    NoCandidates,

    #[error("a verdict on the current candidate is required first")]
    VerdictRequired,

    #[error("verdict for author {got:?} but the current candidate is {expected:?}")]
    OutOfOrder { expected: String, got: String },

    #[error("author {0:?} already has a verdict in this session")]
    DuplicateVerdict(String),

    #[error("all candidates of this session have been judged")]
    SessionComplete,

    #[error("unknown author id {0:?}")]
    UnknownAuthor(String),

    #[error("index artifact: {0}")]
    Artifact(String),

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
}
