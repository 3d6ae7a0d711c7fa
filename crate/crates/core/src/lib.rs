//! Expert finding over an author–document bipartite index.
//!
//! A query article (title and abstract) is scored against every indexed
//! document, either by cosine similarity of TF-IDF vectors or by word
//! mover's distance over pretrained word embeddings. Document scores are
//! then turned into author scores by vote aggregation: reciprocal rank
//! fusion or the Bayesian document-model decomposition. A review session
//! presents the top candidates one at a time, collects accept/reject
//! verdicts and can re-rank by averaging the query with accepted authors'
//! documents.

pub mod artifact;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod eval;
pub mod expertrank;
pub mod feedback;
pub mod similarity;
pub mod textmodel;
pub mod transport;

pub use corpus::{Article, AuthorRecord, AuthorRef, BipartiteIndex, LoadOptions, LoadReport};
pub use engine::{Engine, RankingConfig, Regime};
pub use error::{Error, Result};
pub use expertrank::{ExpertRanking, ExpertScore, FusionMethod, RankedDocuments};
pub use feedback::{Decision, FeedbackLog, FeedbackRecord, ReviewSession, Verdict};
pub use similarity::{PruneCandidates, ScoringConfig, SimilarityEntry, SimilarityTable};
pub use textmodel::{
    EmbeddingStore, NBowDoc, QueryRepresentation, QueryText, SparseVector, TfidfModel, Tokenizer,
};
pub use transport::TransportPlan;
