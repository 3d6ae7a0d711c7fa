//! Query–document similarity: cosine over sparse vectors, and word
//! mover's distance over normalized bags of words with a centroid /
//! relaxed-transport pruning cascade.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textmodel::{EmbeddingStore, NBowDoc, QueryRepresentation, SparseVector};
use crate::transport::{self, TransportPlan};

pub fn cosine(u: &SparseVector, v: &SparseVector) -> f64 {
    if u.is_empty() || v.is_empty() {
        return 0.0;
    }
    (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0)
}

pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Maps a distance to a similarity in (0, 1]; strictly decreasing.
pub fn distance_to_similarity(distance: f64) -> f64 {
    1.0 / (1.0 + distance)
}

fn resolve<'s>(doc: &NBowDoc, store: &'s EmbeddingStore) -> Result<Vec<&'s [f64]>> {
    if doc.is_empty() {
        return Err(Error::EmptyRepresentation);
    }
    doc.vectors(store)
}

fn ground_costs(xs: &[&[f64]], ys: &[&[f64]]) -> Vec<f64> {
    xs.iter()
        .flat_map(|x| ys.iter().map(move |y| euclidean(x, y)))
        .collect()
}

/// Exact word mover's distance and an optimal transport plan between the
/// tokens of `a` (rows) and `b` (columns).
pub fn wmd_exact(a: &NBowDoc, b: &NBowDoc, store: &EmbeddingStore) -> Result<(f64, TransportPlan)> {
    let xs = resolve(a, store)?;
    let ys = resolve(b, store)?;
    let cost = ground_costs(&xs, &ys);
    let supply: Vec<f64> = a.weights().collect();
    let demand: Vec<f64> = b.weights().collect();
    let plan = transport::solve(&supply, &demand, &cost)?;
    Ok((plan.objective().max(0.0), plan))
}

fn centroid(doc: &NBowDoc, vectors: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut c = vec![0.0; dim];
    for (w, x) in doc.weights().zip(vectors) {
        for (ci, xi) in c.iter_mut().zip(x.iter()) {
            *ci += w * xi;
        }
    }
    c
}

/// Word centroid distance: distance between the mass-weighted mean
/// embeddings. A lower bound on [`wmd_exact`].
pub fn wcd_lower_bound(a: &NBowDoc, b: &NBowDoc, store: &EmbeddingStore) -> Result<f64> {
    let xs = resolve(a, store)?;
    let ys = resolve(b, store)?;
    let dim = store.dimension();
    Ok(euclidean(&centroid(a, &xs, dim), &centroid(b, &ys, dim)))
}

/// Relaxed WMD: the larger of the two one-sided relaxations where each
/// token sends all of its mass to its nearest counterpart. A lower bound
/// on [`wmd_exact`].
pub fn rwmd_lower_bound(a: &NBowDoc, b: &NBowDoc, store: &EmbeddingStore) -> Result<f64> {
    let xs = resolve(a, store)?;
    let ys = resolve(b, store)?;
    Ok(rwmd_resolved(a, &xs, b, &ys))
}

fn rwmd_resolved(a: &NBowDoc, xs: &[&[f64]], b: &NBowDoc, ys: &[&[f64]]) -> f64 {
    let (n, m) = (xs.len(), ys.len());
    let cost = ground_costs(xs, ys);
    let forward: f64 = a
        .weights()
        .enumerate()
        .map(|(i, w)| {
            w * cost[i * m..(i + 1) * m]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    let backward: f64 = b
        .weights()
        .enumerate()
        .map(|(j, w)| {
            w * (0..n)
                .map(|i| cost[i * m + j])
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    forward.max(backward)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityRegime {
    Cosine,
    Wmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityEntry {
    /// Higher is more similar.
    pub similarity: f64,
    /// Word mover's distance (wmd regime only). For approximate entries
    /// this is the lower bound that caused the document to be pruned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    /// Score derived from a lower bound rather than the exact distance.
    #[serde(default)]
    pub approximate: bool,
}

impl SimilarityEntry {
    fn exact(similarity: f64) -> Self {
        Self {
            similarity,
            distance: None,
            approximate: false,
        }
    }

    fn from_distance(distance: f64, approximate: bool) -> Self {
        Self {
            similarity: distance_to_similarity(distance),
            distance: Some(distance),
            approximate,
        }
    }
}

/// P(q|d) for every indexed document, indexed by dense document index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTable {
    pub regime: SimilarityRegime,
    pub entries: Vec<SimilarityEntry>,
}

impl SimilarityTable {
    /// A cosine-regime table from externally supplied similarities.
    pub fn from_similarities(similarities: impl IntoIterator<Item = f64>) -> Self {
        Self {
            regime: SimilarityRegime::Cosine,
            entries: similarities
                .into_iter()
                .map(SimilarityEntry::exact)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn similarity(&self, doc: usize) -> f64 {
        self.entries[doc].similarity
    }

    pub fn similarities(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.similarity)
    }
}

/// How many documents the WMD cascade solves exactly up front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PruneCandidates {
    Count(usize),
    /// `"all"`: score every document exactly.
    Exhaustive(Exhaustive),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exhaustive {
    All,
}

impl PruneCandidates {
    pub const DEFAULT: Self = PruneCandidates::Count(200);

    pub fn limit(self) -> Option<usize> {
        match self {
            PruneCandidates::Count(m) => Some(m.max(1)),
            PruneCandidates::Exhaustive(_) => None,
        }
    }
}

impl Default for PruneCandidates {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl std::str::FromStr for PruneCandidates {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" | "inf" | "∞" => Ok(PruneCandidates::Exhaustive(Exhaustive::All)),
            _ => s
                .parse::<usize>()
                .map(PruneCandidates::Count)
                .map_err(|_| format!("expected a count or \"all\", got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoringConfig {
    #[serde(default)]
    pub prune_candidates: PruneCandidates,
}

/// Cosine similarity of the query against every document vector.
pub fn score_cosine(query: &SparseVector, documents: &[SparseVector]) -> Result<SimilarityTable> {
    if query.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let entries = documents
        .par_iter()
        .map(|d| SimilarityEntry::exact(cosine(query, d)))
        .collect();
    Ok(SimilarityTable {
        regime: SimilarityRegime::Cosine,
        entries,
    })
}

/// WMD-derived similarity of the query against every document.
///
/// With a candidate limit `m`, the `m` documents with the smallest centroid
/// distance are solved exactly. Every other document, in increasing
/// centroid distance, is solved exactly only if neither its centroid nor
/// its relaxed bound exceeds the current `m`-th smallest exact distance;
/// otherwise it keeps a similarity derived from its tightest bound and is
/// flagged approximate. A pruned document's true distance is strictly
/// larger than the final `m`-th smallest, so the top `m` documents are
/// exactly those of an exhaustive run.
///
/// Documents with no embedded token (`None`) get similarity 0 and no
/// distance.
pub fn score_wmd(
    query: &NBowDoc,
    documents: &[Option<NBowDoc>],
    store: &EmbeddingStore,
    config: &ScoringConfig,
) -> Result<SimilarityTable> {
    if query.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let qx = resolve(query, store)?;
    let unscored = SimilarityEntry {
        similarity: 0.0,
        distance: None,
        approximate: false,
    };
    let mut entries = vec![unscored; documents.len()];
    let scored: Vec<usize> = (0..documents.len())
        .filter(|&d| documents[d].is_some())
        .collect();

    let exact = |d: usize| -> Result<f64> {
        let doc = documents[d].as_ref().expect("scored document");
        let dx = resolve(doc, store)?;
        let cost = ground_costs(&qx, &dx);
        let supply: Vec<f64> = query.weights().collect();
        let demand: Vec<f64> = doc.weights().collect();
        Ok(transport::solve(&supply, &demand, &cost)?
            .objective()
            .max(0.0))
    };

    let limit = config.prune_candidates.limit();
    if limit.is_none_or(|m| m >= scored.len()) {
        let distances: Vec<f64> = scored
            .par_iter()
            .map(|&d| exact(d))
            .collect::<Result<_>>()?;
        for (&d, dist) in scored.iter().zip(distances) {
            entries[d] = SimilarityEntry::from_distance(dist, false);
        }
        return Ok(SimilarityTable {
            regime: SimilarityRegime::Wmd,
            entries,
        });
    }
    let m = limit.expect("bounded");

    let q_centroid = centroid(query, &qx, store.dimension());
    let mut by_wcd: Vec<(f64, usize)> = scored
        .par_iter()
        .map(|&d| -> Result<(f64, usize)> {
            let doc = documents[d].as_ref().expect("scored document");
            let dx = resolve(doc, store)?;
            Ok((
                euclidean(&q_centroid, &centroid(doc, &dx, store.dimension())),
                d,
            ))
        })
        .collect::<Result<_>>()?;
    by_wcd.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let head: Vec<f64> = by_wcd[..m]
        .par_iter()
        .map(|&(_, d)| exact(d))
        .collect::<Result<_>>()?;
    // Ascending; the last element is the m-th smallest exact distance.
    let mut best: Vec<f64> = head.clone();
    best.sort_by(f64::total_cmp);
    for (&(_, d), dist) in by_wcd[..m].iter().zip(head) {
        entries[d] = SimilarityEntry::from_distance(dist, false);
    }

    for &(wcd, d) in &by_wcd[m..] {
        let kth = best[m - 1];
        if wcd > kth {
            entries[d] = SimilarityEntry::from_distance(wcd, true);
            continue;
        }
        let doc = documents[d].as_ref().expect("scored document");
        let dx = resolve(doc, store)?;
        let bound = wcd.max(rwmd_resolved(query, &qx, doc, &dx));
        if bound > kth {
            entries[d] = SimilarityEntry::from_distance(bound, true);
            continue;
        }
        let dist = exact(d)?;
        entries[d] = SimilarityEntry::from_distance(dist, false);
        if dist < kth {
            let pos = best.partition_point(|&x| x <= dist);
            best.insert(pos, dist);
            best.pop();
        }
    }

    Ok(SimilarityTable {
        regime: SimilarityRegime::Wmd,
        entries,
    })
}

/// Document representations of one regime, borrowed from an index.
#[derive(Debug, Clone, Copy)]
pub enum DocumentRepresentations<'a> {
    Tfidf(&'a [SparseVector]),
    Wmd {
        documents: &'a [Option<NBowDoc>],
        store: &'a EmbeddingStore,
    },
}

pub fn score_all_documents(
    query: &QueryRepresentation,
    representations: DocumentRepresentations<'_>,
    config: &ScoringConfig,
) -> Result<SimilarityTable> {
    match (query, representations) {
        (QueryRepresentation::Sparse(q), DocumentRepresentations::Tfidf(docs)) => {
            score_cosine(q, docs)
        }
        (QueryRepresentation::NBow(q), DocumentRepresentations::Wmd { documents, store }) => {
            score_wmd(q, documents, store, config)
        }
        (QueryRepresentation::Sparse(_), _) => Err(Error::RegimeUnavailable("tfidf-cosine".into())),
        (QueryRepresentation::NBow(_), _) => Err(Error::RegimeUnavailable("wmd".into())),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::textmodel::to_nbow;

    fn sparse(entries: &[(u32, f64)]) -> SparseVector {
        SparseVector::from_entries(entries.iter().copied().collect::<BTreeMap<_, _>>())
    }

    fn store() -> EmbeddingStore {
        let mut s = EmbeddingStore::new(2);
        s.insert("u", &[0.0, 0.0]);
        s.insert("v", &[3.0, 4.0]);
        s.insert("w", &[1.0, 1.0]);
        s
    }

    #[test]
    fn cosine_identity_and_orthogonality() {
        let v = sparse(&[(0, 0.3), (4, -1.2), (9, 2.0)]);
        assert_abs_diff_eq!(cosine(&v, &v), 1.0, epsilon = 1e-12);
        let w = sparse(&[(1, 1.0), (5, 2.0)]);
        assert_eq!(cosine(&v, &w), 0.0);
        assert_eq!(cosine(&v, &SparseVector::empty()), 0.0);
    }

    #[test]
    fn cosine_hand_value() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let u = sparse(&[(0, r), (2, r)]);
        let v = sparse(&[(1, r), (2, r)]);
        assert_abs_diff_eq!(cosine(&u, &v), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn singleton_documents() {
        let s = store();
        let a = to_nbow(&["u"], &s).unwrap();
        let b = to_nbow(&["v"], &s).unwrap();
        let (d, plan) = wmd_exact(&a, &b, &s).unwrap();
        assert_eq!(d, 5.0);
        assert_eq!(plan.flow(0, 0), 1.0);
        assert_eq!(wcd_lower_bound(&a, &b, &s).unwrap(), d);
        assert_eq!(rwmd_lower_bound(&a, &b, &s).unwrap(), d);
    }

    #[test]
    fn identical_documents_have_zero_distance() {
        let s = store();
        let a = to_nbow(&["u", "v", "v", "w"], &s).unwrap();
        let (d, plan) = wmd_exact(&a, &a, &s).unwrap();
        assert!(d <= 1e-9);
        let masses: Vec<f64> = a.weights().collect();
        assert!(plan.satisfies_marginals(&masses, &masses, 1e-7));
        assert_eq!(wcd_lower_bound(&a, &a, &s).unwrap(), 0.0);
        assert_eq!(rwmd_lower_bound(&a, &a, &s).unwrap(), 0.0);
    }

    #[test]
    fn empty_query_rejected() {
        let s = store();
        let doc = to_nbow(&["u"], &s).unwrap();
        let empty = NBowDoc::from_masses(BTreeMap::new());
        assert!(empty.is_none());
        assert!(matches!(
            score_cosine(&SparseVector::empty(), &[]),
            Err(Error::EmptyQuery)
        ));
        let table = score_wmd(&doc, &[Some(doc.clone())], &s, &ScoringConfig::default()).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.similarity(0), 1.0);
    }

    #[test]
    fn unscored_documents_get_zero() {
        let s = store();
        let q = to_nbow(&["u", "w"], &s).unwrap();
        let docs = vec![None, Some(to_nbow(&["v"], &s).unwrap())];
        let table = score_wmd(&q, &docs, &s, &ScoringConfig::default()).unwrap();
        assert_eq!(table.entries[0].similarity, 0.0);
        assert!(table.entries[0].distance.is_none());
        assert!(table.similarity(1) > 0.0);
    }

    #[test]
    fn mismatched_regime() {
        let s = store();
        let q = QueryRepresentation::Sparse(sparse(&[(0, 1.0)]));
        let docs: Vec<Option<NBowDoc>> = vec![];
        let reps = DocumentRepresentations::Wmd {
            documents: &docs,
            store: &s,
        };
        assert!(matches!(
            score_all_documents(&q, reps, &ScoringConfig::default()),
            Err(Error::RegimeUnavailable(_))
        ));
    }

    #[test]
    fn prune_candidates_parsing() {
        assert_eq!("all".parse::<PruneCandidates>().unwrap().limit(), None);
        assert_eq!("5".parse::<PruneCandidates>().unwrap().limit(), Some(5));
        assert!("x".parse::<PruneCandidates>().is_err());
        let cfg: ScoringConfig = serde_json::from_str(r#"{"prune_candidates":"all"}"#).unwrap();
        assert_eq!(cfg.prune_candidates.limit(), None);
        let cfg: ScoringConfig = serde_json::from_str(r#"{"prune_candidates":7}"#).unwrap();
        assert_eq!(cfg.prune_candidates.limit(), Some(7));
    }

    #[test]
    fn similarity_transform_is_decreasing() {
        let ds = [0.0, 1e-9, 0.5, 1.0, 10.0, 1e6];
        for w in ds.windows(2) {
            assert!(distance_to_similarity(w[0]) > distance_to_similarity(w[1]));
        }
        assert_eq!(distance_to_similarity(0.0), 1.0);
    }
}
