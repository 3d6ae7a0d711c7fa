use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::BipartiteIndex;
use crate::error::{Error, Result};

use super::Tokenizer;

/// Sparse real vector with strictly increasing dimensions and a cached L2
/// norm. Zero weights are never stored, so a non-empty vector has a
/// positive norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SparseVectorData", into = "SparseVectorData")]
pub struct SparseVector {
    dims: Vec<u32>,
    weights: Vec<f64>,
    norm: f64,
}

#[derive(Serialize, Deserialize)]
struct SparseVectorData {
    dims: Vec<u32>,
    weights: Vec<f64>,
}

impl TryFrom<SparseVectorData> for SparseVector {
    type Error = String;

    fn try_from(data: SparseVectorData) -> Result<Self, String> {
        if data.dims.len() != data.weights.len() {
            return Err("dims and weights differ in length".into());
        }
        if data.dims.windows(2).any(|w| w[0] >= w[1]) {
            return Err("dims are not strictly increasing".into());
        }
        if data.weights.iter().any(|w| !w.is_finite() || *w == 0.0) {
            return Err("weights must be finite and non-zero".into());
        }
        let norm = l2(&data.weights);
        Ok(Self {
            dims: data.dims,
            weights: data.weights,
            norm,
        })
    }
}

impl From<SparseVector> for SparseVectorData {
    fn from(v: SparseVector) -> Self {
        Self {
            dims: v.dims,
            weights: v.weights,
        }
    }
}

fn l2(weights: &[f64]) -> f64 {
    weights.iter().map(|w| w * w).sum::<f64>().sqrt()
}

impl SparseVector {
    pub fn empty() -> Self {
        Self {
            dims: Vec::new(),
            weights: Vec::new(),
            norm: 0.0,
        }
    }

    /// Builds a vector from (dimension, weight) entries; zero and
    /// non-finite weights are dropped.
    pub fn from_entries(entries: BTreeMap<u32, f64>) -> Self {
        let (dims, weights): (Vec<u32>, Vec<f64>) = entries
            .into_iter()
            .filter(|(_, w)| w.is_finite() && *w != 0.0)
            .unzip();
        let norm = l2(&weights);
        Self {
            dims,
            weights,
            norm,
        }
    }

    /// Same direction, unit L2 norm. Empty stays empty.
    pub fn normalized(&self) -> Self {
        if self.is_empty() {
            return self.clone();
        }
        let weights: Vec<f64> = self.weights.iter().map(|w| w / self.norm).collect();
        let norm = l2(&weights);
        Self {
            dims: self.dims.clone(),
            weights,
            norm,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.dims.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn get(&self, dim: u32) -> f64 {
        self.dims
            .binary_search(&dim)
            .map(|i| self.weights[i])
            .unwrap_or(0.0)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.dims.len() && j < other.dims.len() {
            match self.dims[i].cmp(&other.dims[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.weights[i] * other.weights[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// Vocabulary and document frequencies fitted on the indexed documents.
///
/// Token weights use raw term frequency and the smoothed inverse document
/// frequency `ln((N + 1) / (df + 1)) + 1`; vectors are L2-normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TfidfModelData", into = "TfidfModelData")]
pub struct TfidfModel {
    vocabulary: Vec<String>,
    document_frequencies: Vec<u32>,
    corpus_size: u32,
    lookup: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct TfidfModelData {
    vocabulary: Vec<String>,
    document_frequencies: Vec<u32>,
    corpus_size: u32,
}

impl TryFrom<TfidfModelData> for TfidfModel {
    type Error = String;

    fn try_from(data: TfidfModelData) -> Result<Self, String> {
        if data.vocabulary.len() != data.document_frequencies.len() {
            return Err("vocabulary and frequencies differ in length".into());
        }
        if data
            .document_frequencies
            .iter()
            .any(|&df| df == 0 || df > data.corpus_size)
        {
            return Err("document frequency outside 1..=corpus_size".into());
        }
        let lookup: HashMap<String, u32> = data
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        if lookup.len() != data.vocabulary.len() {
            return Err("duplicate vocabulary token".into());
        }
        Ok(Self {
            vocabulary: data.vocabulary,
            document_frequencies: data.document_frequencies,
            corpus_size: data.corpus_size,
            lookup,
        })
    }
}

impl From<TfidfModel> for TfidfModelData {
    fn from(m: TfidfModel) -> Self {
        Self {
            vocabulary: m.vocabulary,
            document_frequencies: m.document_frequencies,
            corpus_size: m.corpus_size,
        }
    }
}

impl TfidfModel {
    /// Fits on pre-tokenized documents. Vocabulary dimensions are assigned
    /// in lexicographic token order.
    pub fn fit<D: AsRef<[String]>>(documents: impl IntoIterator<Item = D>) -> Self {
        let mut df: BTreeMap<String, u32> = BTreeMap::new();
        let mut corpus_size = 0u32;
        for doc in documents {
            corpus_size += 1;
            let mut unique: Vec<&String> = doc.as_ref().iter().collect();
            unique.sort_unstable();
            unique.dedup();
            for token in unique {
                *df.entry(token.clone()).or_default() += 1;
            }
        }
        let (vocabulary, document_frequencies): (Vec<String>, Vec<u32>) = df.into_iter().unzip();
        let lookup = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self {
            vocabulary,
            document_frequencies,
            corpus_size,
            lookup,
        }
    }

    pub fn corpus_size(&self) -> u32 {
        self.corpus_size
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn dimension(&self, token: &str) -> Option<u32> {
        self.lookup.get(token).copied()
    }

    pub fn token(&self, dim: u32) -> &str {
        &self.vocabulary[dim as usize]
    }

    pub fn document_frequency(&self, token: &str) -> Option<u32> {
        self.dimension(token)
            .map(|d| self.document_frequencies[d as usize])
    }

    pub fn idf(&self, dim: u32) -> f64 {
        let n = f64::from(self.corpus_size);
        let df = f64::from(self.document_frequencies[dim as usize]);
        ((n + 1.0) / (df + 1.0)).ln() + 1.0
    }

    /// L2-normalized TF-IDF vector of `tokens`; out-of-vocabulary tokens
    /// are dropped, so an all-OOV input gives the empty vector.
    pub fn vectorize<S: AsRef<str>>(&self, tokens: &[S]) -> SparseVector {
        let mut tf: BTreeMap<u32, f64> = BTreeMap::new();
        for token in tokens {
            if let Some(dim) = self.dimension(token.as_ref()) {
                *tf.entry(dim).or_default() += 1.0;
            }
        }
        let weighted = tf
            .into_iter()
            .map(|(dim, count)| (dim, count * self.idf(dim)))
            .collect();
        SparseVector::from_entries(weighted).normalized()
    }
}

pub fn fit_tfidf(index: &BipartiteIndex, tokenizer: &Tokenizer) -> Result<TfidfModel> {
    if index.num_docs() == 0 {
        return Err(Error::Artifact(
            "cannot fit TF-IDF on an empty index".into(),
        ));
    }
    Ok(TfidfModel::fit(
        index
            .documents()
            .iter()
            .map(|a| tokenizer.tokenize(&a.text())),
    ))
}

pub fn vectorize_tfidf<S: AsRef<str>>(model: &TfidfModel, tokens: &[S]) -> SparseVector {
    model.vectorize(tokens)
}
