//! Versioned JSON snapshot of an [`Engine`]: articles, dense author map,
//! adjacency, tokenizer settings and precomputed document representations.
//!
//! Serialization is deterministic (no hash-ordered collections), so two
//! builds from the same inputs produce byte-identical files. Embeddings are
//! not embedded in the snapshot; the WMD section records the fingerprint of
//! the store it was built with and loading checks it.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{Article, AuthorRecord, BipartiteIndex};
use crate::engine::{Engine, TfidfRepresentations, WmdRepresentations};
use crate::error::{Error, Result};
use crate::textmodel::{EmbeddingStore, Tokenizer};

pub const FORMAT: &str = "expertfind-index";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexArtifact {
    pub format: String,
    pub version: u32,
    pub tokenizer: Tokenizer,
    pub articles: Vec<Article>,
    pub authors: Vec<AuthorRecord>,
    pub doc_to_authors: Vec<Vec<usize>>,
    #[serde(default)]
    pub tfidf: Option<TfidfRepresentations>,
    #[serde(default)]
    pub wmd: Option<WmdRepresentations>,
}

impl IndexArtifact {
    pub fn from_engine(engine: &Engine) -> Self {
        Self {
            format: FORMAT.to_string(),
            version: VERSION,
            tokenizer: engine.tokenizer.clone(),
            articles: engine.index.documents().to_vec(),
            authors: engine.index.authors().to_vec(),
            doc_to_authors: engine.index.doc_to_authors().to_vec(),
            tfidf: engine.tfidf.clone(),
            wmd: engine.wmd.clone(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let artifact: Self = serde_json::from_slice(bytes)?;
        if artifact.format != FORMAT {
            return Err(Error::Artifact(format!(
                "unexpected format {:?}",
                artifact.format
            )));
        }
        if artifact.version != VERSION {
            return Err(Error::Artifact(format!(
                "unsupported version {} (this build reads {VERSION})",
                artifact.version
            )));
        }
        Ok(artifact)
    }

    /// Rebuilds the engine, checking that the stored adjacency and author
    /// map agree with the articles and that representations cover every
    /// document.
    pub fn into_engine(self, store: Option<EmbeddingStore>) -> Result<Engine> {
        let index = BipartiteIndex::build(self.articles)?;
        if index.authors() != self.authors.as_slice()
            || index.doc_to_authors() != self.doc_to_authors.as_slice()
        {
            return Err(Error::Artifact(
                "stored adjacency does not match the articles".into(),
            ));
        }
        let n = index.num_docs();
        if let Some(t) = &self.tfidf {
            if t.vectors.len() != n {
                return Err(Error::Artifact(
                    "TF-IDF vectors do not cover the index".into(),
                ));
            }
        }
        if let Some(w) = &self.wmd {
            if w.documents.len() != n {
                return Err(Error::Artifact(
                    "nBOW documents do not cover the index".into(),
                ));
            }
            if let Some(store) = &store {
                let fingerprint = store.fingerprint();
                if fingerprint != w.embedding_fingerprint {
                    return Err(Error::Artifact(format!(
                        "embeddings fingerprint {fingerprint} differs from the one the index was built with ({})",
                        w.embedding_fingerprint
                    )));
                }
            }
        }
        Ok(Engine {
            index,
            tokenizer: self.tokenizer,
            tfidf: self.tfidf,
            wmd: self.wmd,
            store: store.map(Arc::new),
        })
    }
}

impl Engine {
    pub fn to_artifact_bytes(&self) -> Result<Vec<u8>> {
        IndexArtifact::from_engine(self).to_bytes()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.to_artifact_bytes()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>, store: Option<EmbeddingStore>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        IndexArtifact::from_bytes(&bytes)?.into_engine(store)
    }
}
