//! The three-article, six-author corpus of the bipartite example: article
//! author sets {3,4,5}, {1,2,3,6} and {6}.

use expertfind_core::{Article, AuthorRef, EmbeddingStore};

pub const TOY_SIMILARITIES: [f64; 3] = [0.2, 0.9, 0.5];

fn authors(ids: &[&str]) -> Vec<AuthorRef> {
    ids.iter()
        .map(|id| AuthorRef {
            id: (*id).to_string(),
            name: format!("Author {id}"),
        })
        .collect()
}

/// Texts are chosen so that [`toy_query`] ranks doc2, doc3, doc1
/// under both regimes, reproducing the order of
/// [`TOY_SIMILARITIES`].
pub fn toy_articles() -> Vec<Article> {
    vec![
        Article {
            doc_id: "doc1".into(),
            title: "Protein folding kinetics".into(),
            abstract_text: "Molecular dynamics of protein folding in cells".into(),
            authors: authors(&["3", "4", "5"]),
            affiliations: vec!["Institute of Biology".into()],
            date: Some("2015-03-02".into()),
        },
        Article {
            doc_id: "doc2".into(),
            title: "Expert finding on bipartite graphs".into(),
            abstract_text: "Reviewer recommendation by voting over author document graphs".into(),
            authors: authors(&["1", "2", "3", "6"]),
            affiliations: vec!["Lab A".into(), "Lab B".into()],
            date: Some("2016-11-20".into()),
        },
        Article {
            doc_id: "doc3".into(),
            title: "Random bipartite graphs".into(),
            abstract_text: "Degree distributions of bipartite networks".into(),
            authors: authors(&["6"]),
            affiliations: vec!["Department of Mathematics".into()],
            date: Some("2017-06-14".into()),
        },
    ]
}

pub fn toy_query() -> (&'static str, &'static str) {
    (
        "Finding expert reviewers",
        "Voting over an author document bipartite graph for reviewer recommendation",
    )
}

/// Four-dimensional embeddings: a graph axis, an expertise axis and a
/// biology axis.
pub fn toy_embeddings() -> EmbeddingStore {
    let mut s = EmbeddingStore::new(4);
    let words: &[(&str, [f64; 4])] = &[
        ("protein", [0.0, 0.0, 1.0, 0.1]),
        ("folding", [0.0, 0.1, 0.9, 0.0]),
        ("kinetics", [0.1, 0.0, 0.8, 0.2]),
        ("molecular", [0.0, 0.0, 1.0, 0.3]),
        ("dynamics", [0.2, 0.0, 0.7, 0.1]),
        ("cells", [0.0, 0.0, 0.9, 0.4]),
        ("expert", [0.1, 1.0, 0.0, 0.0]),
        ("experts", [0.1, 1.0, 0.0, 0.1]),
        ("finding", [0.2, 0.8, 0.0, 0.0]),
        ("reviewer", [0.0, 1.0, 0.0, 0.2]),
        ("reviewers", [0.0, 1.0, 0.1, 0.2]),
        ("recommendation", [0.1, 0.9, 0.0, 0.1]),
        ("voting", [0.3, 0.8, 0.0, 0.0]),
        ("author", [0.2, 0.9, 0.0, 0.0]),
        ("document", [0.4, 0.6, 0.0, 0.0]),
        ("bipartite", [1.0, 0.1, 0.0, 0.0]),
        ("graph", [1.0, 0.2, 0.0, 0.0]),
        ("graphs", [1.0, 0.2, 0.0, 0.1]),
        ("random", [0.7, 0.0, 0.1, 0.5]),
        ("degree", [0.9, 0.0, 0.0, 0.3]),
        ("distributions", [0.6, 0.0, 0.2, 0.5]),
        ("networks", [0.9, 0.1, 0.0, 0.2]),
    ];
    for (t, v) in words {
        s.insert(*t, v);
    }
    s
}
