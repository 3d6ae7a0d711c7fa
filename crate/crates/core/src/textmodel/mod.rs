//! Query and document representations.
//!
//! Two regimes are supported: L2-normalized TF-IDF sparse vectors compared
//! by cosine, and normalized bags of words over pretrained word embeddings
//! compared by word mover's distance.

mod embedding;
mod nbow;
mod tfidf;
mod tokenize;

pub use embedding::{load_embeddings, EmbeddingStore, EmbeddingWarning};
pub use nbow::{to_nbow, NBowDoc};
pub use tfidf::{fit_tfidf, vectorize_tfidf, SparseVector, TfidfModel};
pub use tokenize::{tokenize, Tokenizer, DEFAULT_STOPWORDS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A query article: title and abstract concatenated with a single space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryText {
    raw: String,
    tokens: Vec<String>,
}

impl QueryText {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

pub fn build_query(title: &str, abstract_text: &str, tokenizer: &Tokenizer) -> Result<QueryText> {
    if title.trim().is_empty() && abstract_text.trim().is_empty() {
        return Err(Error::EmptyQuery);
    }
    let raw = format!("{title} {abstract_text}").trim().to_string();
    let tokens = tokenizer.tokenize(&raw);
    if tokens.is_empty() {
        return Err(Error::EmptyQuery);
    }
    Ok(QueryText { raw, tokens })
}

/// The active representation of a query under one regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryRepresentation {
    Sparse(SparseVector),
    NBow(NBowDoc),
}
