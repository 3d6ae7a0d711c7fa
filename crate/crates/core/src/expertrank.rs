//! Vote aggregation from document similarities to author scores.
//!
//! Reciprocal rank: `score(e) = Σ_{d ∈ D(e)} 1 / rank(d)` over the global
//! ranking of all documents. Bayesian voting:
//! `score(e) = Σ_{d ∈ D(e)} P(q|d) · P(d|e) · P(e)` with a uniform author
//! prior `1/|C|` and uniform association `1/|D(e)|`.
//!
//! Ties are always broken by ascending dense index, for documents and for
//! authors alike.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::BipartiteIndex;
use crate::similarity::SimilarityTable;

pub const DEFAULT_TOP_K: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedDocuments {
    order: Vec<usize>,
    rank_of: Vec<usize>,
}

impl RankedDocuments {
    /// Document indices, most similar first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 1-based rank of `doc`.
    pub fn rank_of(&self, doc: usize) -> usize {
        self.rank_of[doc]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

pub fn rank_documents(table: &SimilarityTable) -> RankedDocuments {
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| {
        table
            .similarity(b)
            .total_cmp(&table.similarity(a))
            .then(a.cmp(&b))
    });
    let mut rank_of = vec![0; order.len()];
    for (pos, &doc) in order.iter().enumerate() {
        rank_of[doc] = pos + 1;
    }
    RankedDocuments { order, rank_of }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FusionMethod {
    #[serde(rename = "rr")]
    ReciprocalRank,
    #[serde(rename = "bayes")]
    Bayes,
}

impl FusionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FusionMethod::ReciprocalRank => "rr",
            FusionMethod::Bayes => "bayes",
        }
    }
}

impl std::fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FusionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rr" | "reciprocal_rank" => Ok(FusionMethod::ReciprocalRank),
            "bayes" => Ok(FusionMethod::Bayes),
            other => Err(format!(
                "unknown fusion method {other:?} (expected rr or bayes)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub doc: usize,
    pub rank: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertScore {
    pub author: usize,
    pub score: f64,
    /// One entry per document of D(e) that voted, in ascending doc index.
    pub contributions: Vec<Contribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertRanking {
    pub method: FusionMethod,
    pub scores: Vec<ExpertScore>,
}

impl ExpertRanking {
    fn sorted(method: FusionMethod, mut scores: Vec<ExpertScore>) -> Self {
        scores.sort_by(|a, b| match b.score.total_cmp(&a.score) {
            Ordering::Equal => a.author.cmp(&b.author),
            other => other,
        });
        Self { method, scores }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn authors(&self) -> impl Iterator<Item = usize> + '_ {
        self.scores.iter().map(|s| s.author)
    }

    /// 1-based position of `author`, if ranked.
    pub fn position(&self, author: usize) -> Option<usize> {
        self.scores
            .iter()
            .position(|s| s.author == author)
            .map(|p| p + 1)
    }

    /// Same order, without the given authors.
    pub fn without(&self, excluded: impl Fn(usize) -> bool) -> Self {
        Self {
            method: self.method,
            scores: self
                .scores
                .iter()
                .filter(|s| !excluded(s.author))
                .cloned()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VotingConfig {
    pub method: FusionMethod,
    /// Only documents ranked at or above this cutoff vote in reciprocal
    /// rank fusion. Off by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_cutoff: Option<usize>,
}

impl Default for VotingConfig {
    fn default() -> Self {
        Self {
            method: FusionMethod::ReciprocalRank,
            rank_cutoff: None,
        }
    }
}

pub fn reciprocal_rank_fusion(
    ranked: &RankedDocuments,
    index: &BipartiteIndex,
    rank_cutoff: Option<usize>,
) -> ExpertRanking {
    let scores = index
        .authors()
        .iter()
        .enumerate()
        .map(|(author, record)| {
            let contributions: Vec<Contribution> = record
                .doc_ids
                .iter()
                .map(|&doc| (doc, ranked.rank_of(doc)))
                .filter(|&(_, rank)| rank_cutoff.is_none_or(|cut| rank <= cut))
                .map(|(doc, rank)| Contribution {
                    doc,
                    rank,
                    value: 1.0 / rank as f64,
                })
                .collect();
            ExpertScore {
                author,
                score: contributions.iter().map(|c| c.value).sum(),
                contributions,
            }
        })
        .collect();
    ExpertRanking::sorted(FusionMethod::ReciprocalRank, scores)
}

/// Bayesian voting with uniform priors. Negative similarities (possible
/// only for cosine) are clamped to 0.
pub fn bayes_vote(table: &SimilarityTable, index: &BipartiteIndex) -> ExpertRanking {
    let ranked = rank_documents(table);
    let prior = 1.0 / index.num_authors().max(1) as f64;
    let scores = index
        .authors()
        .iter()
        .enumerate()
        .map(|(author, record)| {
            let association = 1.0 / record.doc_ids.len() as f64;
            let contributions: Vec<Contribution> = record
                .doc_ids
                .iter()
                .map(|&doc| Contribution {
                    doc,
                    rank: ranked.rank_of(doc),
                    value: table.similarity(doc).max(0.0) * association * prior,
                })
                .collect();
            ExpertScore {
                author,
                score: contributions.iter().map(|c| c.value).sum(),
                contributions,
            }
        })
        .collect();
    ExpertRanking::sorted(FusionMethod::Bayes, scores)
}

pub fn fuse(
    table: &SimilarityTable,
    index: &BipartiteIndex,
    config: &VotingConfig,
) -> ExpertRanking {
    match config.method {
        FusionMethod::ReciprocalRank => {
            reciprocal_rank_fusion(&rank_documents(table), index, config.rank_cutoff)
        }
        FusionMethod::Bayes => bayes_vote(table, index),
    }
}

/// The first `min(k, |authors|)` entries. `k` is raised to 1.
pub fn top_k(ranking: &ExpertRanking, k: usize) -> &[ExpertScore] {
    &ranking.scores[..k.max(1).min(ranking.len())]
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::corpus::{Article, AuthorRef};

    fn article(id: &str, authors: &[&str]) -> Article {
        Article {
            doc_id: id.into(),
            title: id.into(),
            abstract_text: "text".into(),
            authors: authors
                .iter()
                .map(|a| AuthorRef {
                    id: a.to_string(),
                    name: a.to_string(),
                })
                .collect(),
            affiliations: vec![],
            date: None,
        }
    }

    fn toy_index() -> BipartiteIndex {
        BipartiteIndex::build(vec![
            article("doc1", &["3", "4", "5"]),
            article("doc2", &["1", "2", "3", "6"]),
            article("doc3", &["6"]),
        ])
        .unwrap()
    }

    fn ids(index: &BipartiteIndex, ranking: &ExpertRanking) -> Vec<String> {
        ranking
            .authors()
            .map(|a| index.author(a).author_id.clone())
            .collect()
    }

    #[test]
    fn ranks_descending_with_index_ties() {
        let table = SimilarityTable::from_similarities([0.2, 0.9, 0.5]);
        let ranked = rank_documents(&table);
        assert_eq!(ranked.order(), &[1, 2, 0]);
        assert_eq!(
            (ranked.rank_of(0), ranked.rank_of(1), ranked.rank_of(2)),
            (3, 1, 2)
        );

        let flat = rank_documents(&SimilarityTable::from_similarities([0.4; 4]));
        assert_eq!(flat.order(), &[0, 1, 2, 3]);

        let one = rank_documents(&SimilarityTable::from_similarities([0.0]));
        assert_eq!(one.rank_of(0), 1);
    }

    #[test]
    fn toy_reciprocal_rank() {
        let index = toy_index();
        let table = SimilarityTable::from_similarities([0.2, 0.9, 0.5]);
        let ranking = reciprocal_rank_fusion(&rank_documents(&table), &index, None);
        assert_eq!(ids(&index, &ranking), ["6", "3", "1", "2", "4", "5"]);
        let scores: Vec<f64> = ranking.scores.iter().map(|s| s.score).collect();
        let expected = [1.5, 4.0 / 3.0, 1.0, 1.0, 1.0 / 3.0, 1.0 / 3.0];
        for (s, e) in scores.iter().zip(expected) {
            assert_abs_diff_eq!(*s, e, epsilon = 1e-12);
        }
        let head: Vec<String> = top_k(&ranking, 3)
            .iter()
            .map(|s| index.author(s.author).author_id.clone())
            .collect();
        assert_eq!(head, ["6", "3", "1"]);
        assert_eq!(top_k(&ranking, 9).len(), 6);
        assert_eq!(top_k(&ranking, 1).len(), 1);
    }

    #[test]
    fn toy_bayes() {
        let index = toy_index();
        let table = SimilarityTable::from_similarities([0.2, 0.9, 0.5]);
        let ranking = bayes_vote(&table, &index);
        let score_of = |id: &str| {
            let a = index.author_index(id).unwrap();
            ranking.scores.iter().find(|s| s.author == a).unwrap().score
        };
        assert_abs_diff_eq!(score_of("6"), (0.9 + 0.5) / 2.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(score_of("3"), (0.2 + 0.9) / 2.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(score_of("4"), 0.2 / 6.0, epsilon = 1e-12);
        // Authors 1 and 2 wrote only doc2: 0.9 / 1 / 6 = 0.15.
        assert_abs_diff_eq!(score_of("1"), 0.15, epsilon = 1e-12);
        assert_eq!(ids(&index, &ranking), ["1", "2", "6", "3", "4", "5"]);
    }

    #[test]
    fn zero_similarities_order_by_index() {
        let index = toy_index();
        let ranking = bayes_vote(&SimilarityTable::from_similarities([0.0; 3]), &index);
        assert!(ranking.scores.iter().all(|s| s.score == 0.0));
        assert_eq!(ranking.authors().collect::<Vec<_>>(), [0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn negative_cosine_clamped_in_bayes_only() {
        let index = toy_index();
        let table = SimilarityTable::from_similarities([-0.5, 0.1, -0.2]);
        let bayes = bayes_vote(&table, &index);
        assert!(bayes.scores.iter().all(|s| s.score >= 0.0));
        let rr = reciprocal_rank_fusion(&rank_documents(&table), &index, None);
        // doc2 first, then doc3 (-0.2), then doc1 (-0.5).
        assert_eq!(ids(&index, &rr)[0], "6");
    }

    #[test]
    fn single_author_single_doc() {
        let index = BipartiteIndex::build(vec![article("d", &["a"])]).unwrap();
        let table = SimilarityTable::from_similarities([0.3]);
        let ranking = reciprocal_rank_fusion(&rank_documents(&table), &index, None);
        assert_eq!(ranking.scores[0].score, 1.0);
    }

    #[test]
    fn rank_cutoff_drops_low_ranks() {
        let index = toy_index();
        let table = SimilarityTable::from_similarities([0.2, 0.9, 0.5]);
        let ranking = reciprocal_rank_fusion(&rank_documents(&table), &index, Some(1));
        let score_of = |id: &str| {
            let a = index.author_index(id).unwrap();
            ranking.scores.iter().find(|s| s.author == a).unwrap().score
        };
        assert_eq!(score_of("6"), 1.0);
        assert_eq!(score_of("3"), 1.0);
        assert_eq!(score_of("4"), 0.0);
        assert_eq!(ranking.len(), 6);
    }

    #[test]
    fn fusion_method_names() {
        assert_eq!(
            "rr".parse::<FusionMethod>().unwrap(),
            FusionMethod::ReciprocalRank
        );
        assert_eq!(
            "bayes".parse::<FusionMethod>().unwrap(),
            FusionMethod::Bayes
        );
        assert!("combsum".parse::<FusionMethod>().is_err());
        assert_eq!(
            serde_json::to_string(&FusionMethod::Bayes).unwrap(),
            "\"bayes\""
        );
    }
}
