//! The query pipeline over a built index: text model, similarity and vote
//! fusion wired together.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Article, BipartiteIndex};
use crate::error::{Error, Result};
use crate::expertrank::{self, ExpertRanking, FusionMethod, VotingConfig, DEFAULT_TOP_K};
use crate::similarity::{self, DocumentRepresentations, ScoringConfig, SimilarityTable};
use crate::textmodel::{
    build_query, to_nbow, EmbeddingStore, NBowDoc, QueryRepresentation, QueryText, SparseVector,
    TfidfModel, Tokenizer,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "tfidf-cosine")]
    TfidfCosine,
    #[serde(rename = "wmd")]
    Wmd,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::TfidfCosine => "tfidf-cosine",
            Regime::Wmd => "wmd",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tfidf-cosine" | "tfidf" | "cosine" => Ok(Regime::TfidfCosine),
            "wmd" => Ok(Regime::Wmd),
            other => Err(format!(
                "unknown regime {other:?} (expected tfidf-cosine or wmd)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingConfig {
    pub regime: Regime,
    #[serde(default)]
    pub scoring: ScoringConfig,
    #[serde(default)]
    pub voting: VotingConfig,
    pub top_k: usize,
}

impl RankingConfig {
    pub fn new(regime: Regime, fusion: FusionMethod) -> Self {
        Self {
            regime,
            scoring: ScoringConfig::default(),
            voting: VotingConfig {
                method: fusion,
                rank_cutoff: None,
            },
            top_k: DEFAULT_TOP_K,
        }
    }
}

/// TF-IDF model and the L2-normalized vector of every document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfRepresentations {
    pub model: TfidfModel,
    pub vectors: Vec<SparseVector>,
}

/// nBOW distribution of every document; `None` when no token of the
/// document has an embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WmdRepresentations {
    pub embedding_fingerprint: String,
    pub documents: Vec<Option<NBowDoc>>,
}

/// A document's representation under one regime.
#[derive(Debug, Clone, Copy)]
pub enum DocumentRepresentation<'a> {
    Sparse(&'a SparseVector),
    NBow(&'a NBowDoc),
}

/// Similarity table and author ranking of one query.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredQuery {
    pub table: SimilarityTable,
    pub ranking: ExpertRanking,
}

#[derive(Debug, Clone)]
pub struct Engine {
    pub(crate) index: BipartiteIndex,
    pub(crate) tokenizer: Tokenizer,
    pub(crate) tfidf: Option<TfidfRepresentations>,
    pub(crate) wmd: Option<WmdRepresentations>,
    pub(crate) store: Option<Arc<EmbeddingStore>>,
}

impl Engine {
    /// Builds the index and precomputes document representations for each
    /// requested regime.
    pub fn build(
        articles: Vec<Article>,
        tokenizer: Tokenizer,
        regimes: &[Regime],
        store: Option<EmbeddingStore>,
    ) -> Result<Self> {
        if regimes.contains(&Regime::Wmd) && store.is_none() {
            return Err(Error::EmbeddingsRequired);
        }
        let index = BipartiteIndex::build(articles)?;
        let tokens: Vec<Vec<String>> = index
            .documents()
            .par_iter()
            .map(|a| tokenizer.tokenize(&a.text()))
            .collect();

        let tfidf = if regimes.contains(&Regime::TfidfCosine) {
            if index.num_docs() == 0 {
                return Err(Error::Artifact(
                    "cannot fit TF-IDF on an empty index".into(),
                ));
            }
            let model = TfidfModel::fit(&tokens);
            let vectors = tokens.par_iter().map(|t| model.vectorize(t)).collect();
            Some(TfidfRepresentations { model, vectors })
        } else {
            None
        };

        let store = store.map(Arc::new);
        let wmd = match (&store, regimes.contains(&Regime::Wmd)) {
            (Some(store), true) => {
                let documents: Vec<Option<NBowDoc>> =
                    tokens.par_iter().map(|t| to_nbow(t, store).ok()).collect();
                let missing = documents.iter().filter(|d| d.is_none()).count();
                if missing > 0 {
                    tracing::warn!(missing, "documents without any embedded token");
                }
                Some(WmdRepresentations {
                    embedding_fingerprint: store.fingerprint(),
                    documents,
                })
            }
            _ => None,
        };

        Ok(Self {
            index,
            tokenizer,
            tfidf,
            wmd,
            store,
        })
    }

    pub fn index(&self) -> &BipartiteIndex {
        &self.index
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    pub fn tfidf(&self) -> Option<&TfidfRepresentations> {
        self.tfidf.as_ref()
    }

    pub fn wmd(&self) -> Option<&WmdRepresentations> {
        self.wmd.as_ref()
    }

    pub fn embeddings(&self) -> Option<&EmbeddingStore> {
        self.store.as_deref()
    }

    /// Regimes that can score queries: TF-IDF when fitted, WMD when both
    /// document distributions and embeddings are loaded.
    pub fn regimes(&self) -> Vec<Regime> {
        let mut out = Vec::new();
        if self.tfidf.is_some() {
            out.push(Regime::TfidfCosine);
        }
        if self.wmd.is_some() && self.store.is_some() {
            out.push(Regime::Wmd);
        }
        out
    }

    /// WMD when available, else TF-IDF.
    pub fn default_regime(&self) -> Option<Regime> {
        self.regimes().into_iter().max()
    }

    pub fn supports(&self, regime: Regime) -> bool {
        self.regimes().contains(&regime)
    }

    pub fn build_query(&self, title: &str, abstract_text: &str) -> Result<QueryText> {
        build_query(title, abstract_text, &self.tokenizer)
    }

    pub fn represent(&self, query: &QueryText, regime: Regime) -> Result<QueryRepresentation> {
        match regime {
            Regime::TfidfCosine => {
                let tfidf = self.tfidf_or_err()?;
                let v = tfidf.model.vectorize(query.tokens());
                if v.is_empty() {
                    return Err(Error::EmptyRepresentation);
                }
                Ok(QueryRepresentation::Sparse(v))
            }
            Regime::Wmd => {
                let (_, store) = self.wmd_or_err()?;
                Ok(QueryRepresentation::NBow(to_nbow(query.tokens(), store)?))
            }
        }
    }

    pub fn document_representation(
        &self,
        doc: usize,
        regime: Regime,
    ) -> Option<DocumentRepresentation<'_>> {
        match regime {
            Regime::TfidfCosine => self
                .tfidf
                .as_ref()
                .map(|t| DocumentRepresentation::Sparse(&t.vectors[doc])),
            Regime::Wmd => self
                .wmd
                .as_ref()
                .and_then(|w| w.documents[doc].as_ref())
                .map(DocumentRepresentation::NBow),
        }
    }

    fn tfidf_or_err(&self) -> Result<&TfidfRepresentations> {
        self.tfidf
            .as_ref()
            .ok_or_else(|| Error::RegimeUnavailable(Regime::TfidfCosine.to_string()))
    }

    fn wmd_or_err(&self) -> Result<(&WmdRepresentations, &EmbeddingStore)> {
        match (&self.wmd, &self.store) {
            (Some(w), Some(s)) => Ok((w, s)),
            _ => Err(Error::RegimeUnavailable(Regime::Wmd.to_string())),
        }
    }

    pub fn score(
        &self,
        query: &QueryRepresentation,
        config: &ScoringConfig,
    ) -> Result<SimilarityTable> {
        let reps = match query {
            QueryRepresentation::Sparse(_) => {
                DocumentRepresentations::Tfidf(&self.tfidf_or_err()?.vectors)
            }
            QueryRepresentation::NBow(_) => {
                let (wmd, store) = self.wmd_or_err()?;
                DocumentRepresentations::Wmd {
                    documents: &wmd.documents,
                    store,
                }
            }
        };
        similarity::score_all_documents(query, reps, config)
    }

    pub fn rank(&self, query: &QueryRepresentation, config: &RankingConfig) -> Result<ScoredQuery> {
        let table = self.score(query, &config.scoring)?;
        let ranking = expertrank::fuse(&table, &self.index, &config.voting);
        Ok(ScoredQuery { table, ranking })
    }

    /// Tokenize, represent, score and fuse in one call.
    pub fn query(
        &self,
        title: &str,
        abstract_text: &str,
        config: &RankingConfig,
    ) -> Result<(QueryText, QueryRepresentation, ScoredQuery)> {
        let text = self.build_query(title, abstract_text)?;
        let repr = self.represent(&text, config.regime)?;
        let scored = self.rank(&repr, config)?;
        Ok((text, repr, scored))
    }
}
