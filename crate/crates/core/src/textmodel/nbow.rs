use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::EmbeddingStore;

/// Normalized bag of words: a probability distribution over the unique
/// embedded tokens of a text, sorted by token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBowDoc {
    entries: Vec<(String, f64)>,
}

impl NBowDoc {
    /// Normalizes non-negative token masses into a distribution. Tokens
    /// with zero mass are dropped; `None` if nothing remains.
    pub fn from_masses(masses: BTreeMap<String, f64>) -> Option<Self> {
        let total: f64 = masses.values().filter(|m| **m > 0.0).sum();
        if !(total > 0.0 && total.is_finite()) {
            return None;
        }
        let entries = masses
            .into_iter()
            .filter(|(_, m)| *m > 0.0)
            .map(|(t, m)| (t, m / total))
            .collect();
        Some(Self { entries })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, w)| *w)
    }

    pub fn weight(&self, token: &str) -> f64 {
        self.entries
            .binary_search_by(|(t, _)| t.as_str().cmp(token))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// Resolves every token's embedding, failing if one is missing.
    pub fn vectors<'s>(&self, store: &'s EmbeddingStore) -> Result<Vec<&'s [f64]>> {
        self.entries
            .iter()
            .map(|(t, _)| {
                store
                    .vector(t)
                    .ok_or_else(|| Error::Artifact(format!("token {t:?} has no embedding")))
            })
            .collect()
    }
}

/// Drops tokens without an embedding and normalizes the remaining counts.
pub fn to_nbow<S: AsRef<str>>(tokens: &[S], store: &EmbeddingStore) -> Result<NBowDoc> {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for token in tokens {
        let token = token.as_ref();
        if store.contains(token) {
            *counts.entry(token.to_string()).or_default() += 1.0;
        }
    }
    NBowDoc::from_masses(counts).ok_or(Error::EmptyRepresentation)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn store() -> EmbeddingStore {
        let mut s = EmbeddingStore::new(2);
        s.insert("a", &[0.0, 1.0]);
        s.insert("b", &[1.0, 0.0]);
        s.insert("c", &[1.0, 1.0]);
        s
    }

    #[test]
    fn counts_are_normalized() {
        let doc = to_nbow(&["a", "a", "b"], &store()).unwrap();
        assert_abs_diff_eq!(doc.weight("a"), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(doc.weight("b"), 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(doc.len(), 2);
    }

    #[test]
    fn single_token() {
        let doc = to_nbow(&["a"], &store()).unwrap();
        assert_eq!(doc.entries(), &[("a".to_string(), 1.0)]);
    }

    #[test]
    fn oov_only_is_an_error() {
        assert!(matches!(
            to_nbow(&["oov1", "oov2"], &store()),
            Err(Error::EmptyRepresentation)
        ));
    }

    proptest! {
        #[test]
        fn masses_form_a_distribution(tokens in prop::collection::vec("[a-e]", 0..30)) {
            match to_nbow(&tokens, &store()) {
                Ok(doc) => {
                    let total: f64 = doc.weights().sum();
                    prop_assert!((total - 1.0).abs() <= 1e-9);
                    prop_assert!(doc.weights().all(|w| w > 0.0));
                    prop_assert!(doc.tokens().all(|t| store().contains(t)));
                }
                Err(e) => {
                    prop_assert!(matches!(e, Error::EmptyRepresentation));
                    prop_assert!(tokens.iter().all(|t| !store().contains(t)));
                }
            }
        }
    }
}
