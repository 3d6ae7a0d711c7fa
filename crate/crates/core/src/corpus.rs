//! Article corpus ingestion and the author–document bipartite index.
//!
//! The corpus file is UTF-8 JSON-lines, one article per line:
//!
//! ```text
//! {"doc_id": "d1", "title": "...", "abstract": "...",
//!  "authors": [{"id": "a1", "name": "Ada"}],
//!  "affiliations": ["..."], "date": "2017-01-30"}
//! ```
//!
//! `affiliations` and `date` are optional display metadata and never
//! influence scoring.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textmodel::Tokenizer;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorRef {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub doc_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub authors: Vec<AuthorRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub affiliations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
}

impl Article {
    /// Text fed to the text models: title and abstract joined by one space.
    pub fn text(&self) -> String {
        format!("{} {}", self.title, self.abstract_text)
    }

    pub fn author_ids(&self) -> impl Iterator<Item = &str> {
        self.authors.iter().map(|a| a.id.as_str())
    }

    /// Checks the per-article invariants. The tokenizer, when given, is
    /// used to reject articles whose text is empty after tokenization.
    pub fn validate(&self, tokenizer: Option<&Tokenizer>) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidArticle {
            doc_id: self.doc_id.clone(),
            reason: reason.to_string(),
        };
        if self.doc_id.trim().is_empty() {
            return Err(invalid("doc_id is empty"));
        }
        if self.authors.is_empty() {
            return Err(invalid("author list is empty"));
        }
        if self.authors.iter().any(|a| a.id.trim().is_empty()) {
            return Err(invalid("author id is empty"));
        }
        let mut seen = HashSet::new();
        if !self.authors.iter().all(|a| seen.insert(a.id.as_str())) {
            return Err(invalid("author listed twice"));
        }
        if let Some(date) = &self.date {
            if chrono::NaiveDate::parse_from_str(date, "%Y-%m-%d").is_err() {
                return Err(invalid("date is not YYYY-MM-DD"));
            }
        }
        match tokenizer {
            Some(t) if t.tokenize(&self.text()).is_empty() => {
                Err(invalid("title and abstract have no tokens"))
            }
            _ if self.title.trim().is_empty() && self.abstract_text.trim().is_empty() => {
                Err(invalid("title and abstract are both blank"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Abort on the first malformed line instead of skipping it.
    pub strict: bool,
    pub tokenizer: Option<Tokenizer>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct LoadReport {
    pub articles: Vec<Article>,
    /// Lines skipped in lenient mode.
    pub errors: Vec<LineError>,
}

pub fn load_corpus(path: impl AsRef<Path>, options: &LoadOptions) -> Result<LoadReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), options).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_corpus(reader: impl BufRead, options: &LoadOptions) -> Result<LoadReport> {
    let mut report = LoadReport::default();
    let mut ids = HashSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<Article>(&line)
            .map_err(|e| e.to_string())
            .and_then(|a| {
                a.validate(options.tokenizer.as_ref())
                    .map(|_| a)
                    .map_err(|e| e.to_string())
            });
        match parsed {
            Ok(article) => {
                if !ids.insert(article.doc_id.clone()) {
                    return Err(Error::DuplicateDocId(article.doc_id));
                }
                report.articles.push(article);
            }
            Err(message) if options.strict => {
                return Err(Error::CorpusLine {
                    line: line_no,
                    message,
                })
            }
            Err(message) => {
                tracing::warn!(line = line_no, %message, "skipping corpus line");
                report.errors.push(LineError {
                    line: line_no,
                    message,
                });
            }
        }
    }
    Ok(report)
}

pub fn write_corpus(articles: &[Article], mut writer: impl Write) -> std::io::Result<()> {
    for article in articles {
        serde_json::to_writer(&mut writer, article)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorRecord {
    pub author_id: String,
    pub display_name: String,
    /// D(e): dense indices of the documents this author wrote, ascending.
    pub doc_ids: Vec<usize>,
}

/// Immutable bipartite graph of documents and authors.
///
/// Documents keep their input order; authors are numbered by first
/// appearance while scanning documents in order, so every downstream
/// tie-break on dense indices is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteIndex {
    documents: Vec<Article>,
    authors: Vec<AuthorRecord>,
    doc_to_authors: Vec<Vec<usize>>,
    doc_index: HashMap<String, usize>,
    author_index: HashMap<String, usize>,
}

impl BipartiteIndex {
    pub fn build(articles: Vec<Article>) -> Result<Self> {
        let mut doc_index = HashMap::with_capacity(articles.len());
        let mut author_index: HashMap<String, usize> = HashMap::new();
        let mut authors: Vec<AuthorRecord> = Vec::new();
        let mut doc_to_authors = Vec::with_capacity(articles.len());

        for (d, article) in articles.iter().enumerate() {
            article.validate(None)?;
            if doc_index.insert(article.doc_id.clone(), d).is_some() {
                return Err(Error::DuplicateDocId(article.doc_id.clone()));
            }
            let mut row = Vec::with_capacity(article.authors.len());
            for author in &article.authors {
                let e = *author_index.entry(author.id.clone()).or_insert_with(|| {
                    authors.push(AuthorRecord {
                        author_id: author.id.clone(),
                        display_name: author.name.clone(),
                        doc_ids: Vec::new(),
                    });
                    authors.len() - 1
                });
                authors[e].doc_ids.push(d);
                row.push(e);
            }
            doc_to_authors.push(row);
        }

        Ok(Self {
            documents: articles,
            authors,
            doc_to_authors,
            doc_index,
            author_index,
        })
    }

    pub fn num_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn num_authors(&self) -> usize {
        self.authors.len()
    }

    /// |E|, the number of authorship edges.
    pub fn num_edges(&self) -> usize {
        self.doc_to_authors.iter().map(Vec::len).sum()
    }

    pub fn documents(&self) -> &[Article] {
        &self.documents
    }

    pub fn document(&self, doc: usize) -> &Article {
        &self.documents[doc]
    }

    pub fn authors(&self) -> &[AuthorRecord] {
        &self.authors
    }

    pub fn author(&self, author: usize) -> &AuthorRecord {
        &self.authors[author]
    }

    pub fn doc_index(&self, doc_id: &str) -> Option<usize> {
        self.doc_index.get(doc_id).copied()
    }

    pub fn author_index(&self, author_id: &str) -> Option<usize> {
        self.author_index.get(author_id).copied()
    }

    /// Row `doc` of the adjacency matrix, in the article's author order.
    pub fn doc_authors(&self, doc: usize) -> &[usize] {
        &self.doc_to_authors[doc]
    }

    /// D(e), the documents written by `author`.
    pub fn docs_of_author(&self, author: usize) -> Result<&[usize]> {
        self.authors
            .get(author)
            .map(|a| a.doc_ids.as_slice())
            .ok_or(Error::AuthorOutOfRange {
                index: author,
                len: self.authors.len(),
            })
    }

    pub fn doc_to_authors(&self) -> &[Vec<usize>] {
        &self.doc_to_authors
    }

    /// Author-side adjacency lists: entry `e` is D(e).
    pub fn author_to_docs(&self) -> Vec<&[usize]> {
        self.authors.iter().map(|a| a.doc_ids.as_slice()).collect()
    }
}

pub fn build_index(articles: Vec<Article>) -> Result<BipartiteIndex> {
    BipartiteIndex::build(articles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn article(id: &str, authors: &[&str]) -> Article {
        Article {
            doc_id: id.to_string(),
            title: format!("title of {id}"),
            abstract_text: "some abstract words".to_string(),
            authors: authors
                .iter()
                .map(|a| AuthorRef {
                    id: a.to_string(),
                    name: format!("Author {a}"),
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

    #[test]
    fn toy_adjacency() {
        let index = toy_index();
        assert_eq!(index.num_docs(), 3);
        assert_eq!(index.num_authors(), 6);
        assert_eq!(index.num_edges(), 8);
        let six = index.author_index("6").unwrap();
        assert_eq!(index.docs_of_author(six).unwrap(), &[1, 2]);
        let three = index.author_index("3").unwrap();
        assert_eq!(index.docs_of_author(three).unwrap(), &[0, 1]);
        let four = index.author_index("4").unwrap();
        assert_eq!(index.docs_of_author(four).unwrap(), &[0]);
    }

    #[test]
    fn dense_author_indices_follow_first_appearance() {
        let index = toy_index();
        let order: Vec<&str> = index
            .authors()
            .iter()
            .map(|a| a.author_id.as_str())
            .collect();
        assert_eq!(order, ["3", "4", "5", "1", "2", "6"]);
    }

    #[test]
    fn single_article_single_author() {
        let index = BipartiteIndex::build(vec![article("only", &["a"])]).unwrap();
        assert_eq!(index.doc_to_authors(), &[vec![0]]);
        assert_eq!(index.docs_of_author(0).unwrap(), &[0]);
    }

    #[test]
    fn out_of_range_author() {
        let index = toy_index();
        assert!(matches!(
            index.docs_of_author(6),
            Err(Error::AuthorOutOfRange { index: 6, len: 6 })
        ));
    }

    #[test]
    fn duplicate_doc_id_rejected() {
        let err = BipartiteIndex::build(vec![article("x", &["a"]), article("x", &["b"])]);
        assert!(matches!(err, Err(Error::DuplicateDocId(id)) if id == "x"));
    }

    #[test]
    fn empty_corpus_file() {
        let report = read_corpus("".as_bytes(), &LoadOptions::default()).unwrap();
        assert!(report.articles.is_empty());
        assert!(report.errors.is_empty());
    }

    #[test]
    fn lenient_load_reports_bad_line() {
        let input = concat!(
            r#"{"doc_id":"d1","title":"t","abstract":"a"}"#,
            "\n",
            r#"{"doc_id":"d2","title":"graph","abstract":"x","authors":[{"id":"a","name":"A"}]}"#,
            "\n",
        );
        let report = read_corpus(input.as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(report.articles.len(), 1);
        assert_eq!(report.articles[0].doc_id, "d2");
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].line, 1);
        assert!(report.errors[0].message.contains("authors"));
    }

    #[test]
    fn strict_load_aborts() {
        let input = "{\"doc_id\":\"d1\"}\n";
        let options = LoadOptions {
            strict: true,
            ..Default::default()
        };
        assert!(matches!(
            read_corpus(input.as_bytes(), &options),
            Err(Error::CorpusLine { line: 1, .. })
        ));
    }

    #[test]
    fn duplicate_doc_id_is_fatal_even_when_lenient() {
        let line =
            r#"{"doc_id":"d1","title":"t","abstract":"a","authors":[{"id":"a","name":"A"}]}"#;
        let input = format!("{line}\n{line}\n");
        assert!(matches!(
            read_corpus(input.as_bytes(), &LoadOptions::default()),
            Err(Error::DuplicateDocId(_))
        ));
    }

    #[test]
    fn bad_date_and_empty_tokens_rejected() {
        let mut a = article("d", &["x"]);
        a.date = Some("2017-13-01".into());
        assert!(a.validate(None).is_err());
        a.date = Some("2017-12-01".into());
        assert!(a.validate(None).is_ok());

        let tokenizer = Tokenizer::default();
        let mut empty = article("e", &["x"]);
        empty.title = "a".into();
        empty.abstract_text = "the of".into();
        assert!(empty.validate(None).is_ok());
        assert!(empty.validate(Some(&tokenizer)).is_err());
    }
}
