//! Random instances and the planted-expert corpus generator.

use std::collections::BTreeMap;

use expertfind_core::{Article, AuthorRef, EmbeddingStore, NBowDoc};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `vocab` tokens `w0, w1, ...` with components uniform in [-1, 1].
pub fn random_store(rng: &mut impl Rng, vocab: usize, dim: usize) -> EmbeddingStore {
    let mut store = EmbeddingStore::new(dim);
    for t in 0..vocab {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        store.insert(format!("w{t}"), &v);
    }
    store
}

/// Between 1 and `max_unique` distinct store tokens with random positive
/// masses, normalized.
pub fn random_nbow(rng: &mut impl Rng, store: &EmbeddingStore, max_unique: usize) -> NBowDoc {
    let k = rng.gen_range(1..=max_unique.min(store.len()));
    let tokens: Vec<&String> = store.tokens().choose_multiple(rng, k).collect();
    let masses: BTreeMap<String, f64> = tokens
        .into_iter()
        .map(|t| (t.clone(), rng.gen_range(0.05..1.0)))
        .collect();
    NBowDoc::from_masses(masses).expect("positive masses")
}

/// `n_docs` articles, each with 1 to 4 distinct authors drawn from
/// `n_authors` ids.
pub fn random_articles(rng: &mut impl Rng, n_docs: usize, n_authors: usize) -> Vec<Article> {
    let pool: Vec<usize> = (0..n_authors).collect();
    (0..n_docs)
        .map(|d| {
            let k = rng.gen_range(1..=4.min(n_authors));
            let authors = pool
                .choose_multiple(rng, k)
                .map(|a| AuthorRef {
                    id: format!("author{a}"),
                    name: format!("Author {a}"),
                })
                .collect();
            Article {
                doc_id: format!("doc{d}"),
                title: format!("title number{d}"),
                abstract_text: "random abstract text".into(),
                authors,
                affiliations: vec![],
                date: None,
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub topics: usize,
    pub authors_per_topic: usize,
    pub docs_per_topic: usize,
    /// Documents per topic written by the topic's planted expert.
    pub planted_docs: usize,
    pub words_per_topic: usize,
    pub background_words: usize,
    pub dimension: usize,
    pub doc_len: usize,
    pub queries: usize,
}

impl Default for PlantedConfig {
    /// 60 authors, 200 documents, 100 queries.
    fn default() -> Self {
        Self {
            topics: 10,
            authors_per_topic: 6,
            docs_per_topic: 20,
            planted_docs: 12,
            words_per_topic: 15,
            background_words: 60,
            dimension: 16,
            doc_len: 30,
            queries: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedQuery {
    pub title: String,
    pub abstract_text: String,
    pub topic: usize,
    pub expert_id: String,
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub articles: Vec<Article>,
    pub embeddings: EmbeddingStore,
    pub queries: Vec<PlantedQuery>,
}

fn topic_word(t: usize, k: usize) -> String {
    format!("topic{t}term{k}")
}

fn background_word(k: usize) -> String {
    format!("common{k}")
}

pub fn expert_id(topic: usize) -> String {
    format!("author-{topic}-0")
}

/// Topic-clustered corpus. Each topic has one planted expert who writes
/// most of the topic's documents, in topic-dense language; the other
/// authors of the topic write fewer documents mixing topic, background and
/// foreign-topic words. Topic word embeddings cluster around a per-topic
/// centre; background words are spread around the origin.
pub fn planted_corpus(seed: u64, config: &PlantedConfig) -> PlantedCorpus {
    let mut rng = rng(seed);
    let dim = config.dimension;

    let mut embeddings = EmbeddingStore::new(dim);
    for t in 0..config.topics {
        let centre: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        for k in 0..config.words_per_topic {
            let v: Vec<f64> = centre
                .iter()
                .map(|c| c + rng.gen_range(-0.4..0.4))
                .collect();
            embeddings.insert(topic_word(t, k), &v);
        }
    }
    for k in 0..config.background_words {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.7..0.7)).collect();
        embeddings.insert(background_word(k), &v);
    }

    let author = |t: usize, k: usize| AuthorRef {
        id: format!("author-{t}-{k}"),
        name: format!("Researcher {t}.{k}"),
    };
    let words = |rng: &mut ChaCha8Rng, topic: usize, n_topic: usize, n_other: usize| {
        let mut out: Vec<String> = (0..n_topic)
            .map(|_| topic_word(topic, rng.gen_range(0..config.words_per_topic)))
            .collect();
        for _ in 0..n_other {
            if rng.gen_bool(0.5) {
                out.push(background_word(rng.gen_range(0..config.background_words)));
            } else {
                let other = (topic + rng.gen_range(1..config.topics)) % config.topics;
                out.push(topic_word(other, rng.gen_range(0..config.words_per_topic)));
            }
        }
        out.shuffle(rng);
        out
    };

    let mut articles = Vec::new();
    for t in 0..config.topics {
        for i in 0..config.docs_per_topic {
            let (authors, text) = if i < config.planted_docs {
                let n_topic = config.doc_len * 85 / 100;
                (
                    vec![author(t, 0)],
                    words(&mut rng, t, n_topic, config.doc_len - n_topic),
                )
            } else {
                let others = config.authors_per_topic - 1;
                let lead = 1 + (i - config.planted_docs) % others;
                let mut authors = vec![author(t, lead)];
                let co = 1 + rng.gen_range(0..others);
                if co != lead {
                    authors.push(author(t, co));
                }
                let n_topic = config.doc_len * 45 / 100;
                (
                    authors,
                    words(&mut rng, t, n_topic, config.doc_len - n_topic),
                )
            };
            let split = text.len() / 4;
            articles.push(Article {
                doc_id: format!("t{t}d{i}"),
                title: text[..split].join(" "),
                abstract_text: text[split..].join(" "),
                authors,
                affiliations: vec![format!("Department {t}")],
                date: Some(format!("20{:02}-0{}-1{}", 10 + i % 9, 1 + i % 9, i % 10)),
            });
        }
    }
    articles.shuffle(&mut rng);

    let queries = (0..config.queries)
        .map(|q| {
            let topic = q % config.topics;
            let text = words(&mut rng, topic, 10, 3);
            PlantedQuery {
                title: text[..3].join(" "),
                abstract_text: text[3..].join(" "),
                topic,
                expert_id: expert_id(topic),
            }
        })
        .collect();

    PlantedCorpus {
        articles,
        embeddings,
        queries,
    }
}
