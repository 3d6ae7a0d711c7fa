//! Interactive review sessions.
//!
//! Candidates are presented one at a time; each must be accepted or
//! rejected before the next one is shown. A recompute averages the query
//! representation with the documents of the authors accepted since the
//! previous recompute, re-scores, and restarts the sequence without any
//! author already judged. Every verdict is appended to a JSON-lines log
//! from which all verdict sequences can be replayed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::BipartiteIndex;
use crate::engine::{DocumentRepresentation, Engine, RankingConfig, ScoredQuery};
use crate::error::{Error, Result};
use crate::expertrank::{rank_documents, top_k, ExpertRanking, FusionMethod, RankedDocuments};
use crate::similarity::SimilarityTable;
use crate::textmodel::{NBowDoc, QueryRepresentation, QueryText, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
}

impl std::str::FromStr for Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "accept" => Ok(Decision::Accept),
            "reject" => Ok(Decision::Reject),
            other => Err(format!(
                "unknown decision {other:?} (expected accept or reject)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub author: usize,
    pub decision: Decision,
    /// RFC 3339, UTC.
    pub timestamp: String,
    /// Recompute epoch the verdict was given in.
    pub epoch: u32,
}

/// One line of the feedback log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub ts: String,
    pub session_id: String,
    pub query_hash: String,
    pub author_id: String,
    pub decision: Decision,
    pub recompute_epoch: u32,
}

/// Append-only JSON-lines verdict log. Each record is written with a
/// single `write` on an `O_APPEND` handle under a mutex.
#[derive(Debug)]
pub struct FeedbackLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl FeedbackLog {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &FeedbackRecord) -> Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        let mut file = self.file.lock().unwrap_or_else(|p| p.into_inner());
        file.write_all(&line)
            .and_then(|_| file.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    /// All records in log order.
    pub fn replay(path: impl AsRef<Path>) -> Result<Vec<FeedbackRecord>> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut records = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line).map_err(|e| Error::CorpusLine {
                line: n + 1,
                message: e.to_string(),
            })?;
            records.push(record);
        }
        Ok(records)
    }

    /// Verdict sequences keyed by session id, each in log order.
    pub fn sessions(records: Vec<FeedbackRecord>) -> BTreeMap<String, Vec<FeedbackRecord>> {
        let mut out: BTreeMap<String, Vec<FeedbackRecord>> = BTreeMap::new();
        for r in records {
            out.entry(r.session_id.clone()).or_default().push(r);
        }
        out
    }
}

pub fn query_hash(query: &QueryText) -> String {
    hex::encode(Sha256::digest(query.raw().as_bytes()))
}

/// `(v_q + Σ v_d) / (1 + |S|)`, renormalized: L2 for sparse vectors, total
/// mass for nBOW distributions. Documents of the other regime are ignored.
/// With no usable document the query is returned unchanged.
pub fn average_representation(
    query: &QueryRepresentation,
    documents: &[DocumentRepresentation<'_>],
) -> QueryRepresentation {
    match query {
        QueryRepresentation::Sparse(q) => {
            let docs: Vec<&SparseVector> = documents
                .iter()
                .filter_map(|d| match d {
                    DocumentRepresentation::Sparse(v) => Some(*v),
                    _ => None,
                })
                .collect();
            if docs.is_empty() {
                return query.clone();
            }
            let count = (1 + docs.len()) as f64;
            let mut sum: BTreeMap<u32, f64> = q.iter().collect();
            for d in docs {
                for (dim, w) in d.iter() {
                    *sum.entry(dim).or_default() += w;
                }
            }
            let mean = sum.into_iter().map(|(d, w)| (d, w / count)).collect();
            QueryRepresentation::Sparse(SparseVector::from_entries(mean).normalized())
        }
        QueryRepresentation::NBow(q) => {
            let docs: Vec<&NBowDoc> = documents
                .iter()
                .filter_map(|d| match d {
                    DocumentRepresentation::NBow(v) => Some(*v),
                    _ => None,
                })
                .collect();
            if docs.is_empty() {
                return query.clone();
            }
            let count = (1 + docs.len()) as f64;
            let mut sum: BTreeMap<String, f64> = q.entries().iter().cloned().collect();
            for d in docs {
                for (t, w) in d.entries() {
                    *sum.entry(t.clone()).or_default() += w;
                }
            }
            let mean = sum.into_iter().map(|(t, w)| (t, w / count)).collect();
            QueryRepresentation::NBow(
                NBowDoc::from_masses(mean).expect("mean of distributions has positive mass"),
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NextCandidate {
    /// `position` is 1-based within the current candidate list.
    Candidate {
        position: usize,
        author: usize,
    },
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleEvidence {
    pub doc_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub authors: Vec<String>,
    pub affiliations: Vec<String>,
    pub date: Option<String>,
    /// Rank of this document among all documents for the current query.
    pub rank: usize,
    pub similarity: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateProfile {
    pub author_id: String,
    pub name: String,
    pub position: usize,
    pub total_candidates: usize,
    pub score: f64,
    pub method: FusionMethod,
    pub recompute_epoch: u32,
    /// Contributing articles, best ranked first.
    pub articles: Vec<ArticleEvidence>,
}

#[derive(Debug, Clone)]
pub struct ReviewSession {
    id: String,
    query: QueryText,
    query_hash: String,
    representation: QueryRepresentation,
    config: RankingConfig,
    table: SimilarityTable,
    ranked: RankedDocuments,
    ranking: ExpertRanking,
    candidates: Vec<usize>,
    cursor: usize,
    verdicts: Vec<Verdict>,
    judged: BTreeSet<usize>,
    recompute_count: u32,
}

impl ReviewSession {
    pub fn open(
        id: impl Into<String>,
        query: QueryText,
        representation: QueryRepresentation,
        scored: ScoredQuery,
        config: RankingConfig,
    ) -> Result<Self> {
        if scored.ranking.is_empty() {
            return Err(Error::NoCandidates);
        }
        let candidates = top_k(&scored.ranking, config.top_k)
            .iter()
            .map(|s| s.author)
            .collect();
        Ok(Self {
            id: id.into(),
            query_hash: query_hash(&query),
            query,
            representation,
            config,
            ranked: rank_documents(&scored.table),
            table: scored.table,
            ranking: scored.ranking,
            candidates,
            cursor: 0,
            verdicts: Vec::new(),
            judged: BTreeSet::new(),
            recompute_count: 0,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn query(&self) -> &QueryText {
        &self.query
    }

    pub fn query_hash(&self) -> &str {
        &self.query_hash
    }

    pub fn representation(&self) -> &QueryRepresentation {
        &self.representation
    }

    pub fn config(&self) -> &RankingConfig {
        &self.config
    }

    /// Full current ranking (judged authors removed after a recompute).
    pub fn ranking(&self) -> &ExpertRanking {
        &self.ranking
    }

    pub fn table(&self) -> &SimilarityTable {
        &self.table
    }

    /// Authors presented in this epoch, in order.
    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    pub fn judged(&self) -> &BTreeSet<usize> {
        &self.judged
    }

    pub fn recompute_count(&self) -> u32 {
        self.recompute_count
    }

    pub fn is_complete(&self) -> bool {
        self.cursor >= self.candidates.len()
    }

    pub fn accepted(&self) -> impl Iterator<Item = usize> + '_ {
        self.verdicts
            .iter()
            .filter(|v| v.decision == Decision::Accept)
            .map(|v| v.author)
    }

    /// The candidate at the cursor; does not advance.
    pub fn next_candidate(&self) -> Result<NextCandidate> {
        if self.cursor > 0 && !self.judged.contains(&self.candidates[self.cursor - 1]) {
            return Err(Error::VerdictRequired);
        }
        Ok(match self.candidates.get(self.cursor) {
            Some(&author) => NextCandidate::Candidate {
                position: self.cursor + 1,
                author,
            },
            None => NextCandidate::Complete,
        })
    }

    /// Records a verdict on the current candidate, appends it to `log`
    /// when given, and advances the cursor. Nothing changes if the log
    /// write fails.
    pub fn record_verdict(
        &mut self,
        index: &BipartiteIndex,
        author: usize,
        decision: Decision,
        log: Option<&FeedbackLog>,
    ) -> Result<&Verdict> {
        let author_id = |a: usize| {
            index
                .authors()
                .get(a)
                .map_or_else(|| format!("#{a}"), |r| r.author_id.clone())
        };
        if self.judged.contains(&author) {
            return Err(Error::DuplicateVerdict(author_id(author)));
        }
        let Some(&current) = self.candidates.get(self.cursor) else {
            return Err(Error::SessionComplete);
        };
        if current != author {
            return Err(Error::OutOfOrder {
                expected: author_id(current),
                got: author_id(author),
            });
        }
        let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
        if let Some(log) = log {
            log.append(&FeedbackRecord {
                ts: timestamp.clone(),
                session_id: self.id.clone(),
                query_hash: self.query_hash.clone(),
                author_id: author_id(author),
                decision,
                recompute_epoch: self.recompute_count,
            })?;
        }
        self.verdicts.push(Verdict {
            author,
            decision,
            timestamp,
            epoch: self.recompute_count,
        });
        self.judged.insert(author);
        self.cursor += 1;
        Ok(self.verdicts.last().expect("just pushed"))
    }

    /// Documents whose representations feed the next recompute: the union
    /// of D(e) over authors accepted in the current epoch, ascending.
    pub fn feedback_documents(&self, index: &BipartiteIndex) -> Vec<usize> {
        let docs: BTreeSet<usize> = self
            .verdicts
            .iter()
            .filter(|v| v.epoch == self.recompute_count && v.decision == Decision::Accept)
            .flat_map(|v| index.author(v.author).doc_ids.iter().copied())
            .collect();
        docs.into_iter().collect()
    }

    pub fn recompute(&mut self, engine: &Engine) -> Result<()> {
        let docs = self.feedback_documents(engine.index());
        let regime = self.config.regime;
        let reps: Vec<DocumentRepresentation<'_>> = docs
            .iter()
            .filter_map(|&d| engine.document_representation(d, regime))
            .collect();
        let representation = average_representation(&self.representation, &reps);
        let scored = engine.rank(&representation, &self.config)?;
        let judged = &self.judged;
        let ranking = scored.ranking.without(|a| judged.contains(&a));

        self.candidates = top_k(&ranking, self.config.top_k)
            .iter()
            .map(|s| s.author)
            .collect();
        self.ranked = rank_documents(&scored.table);
        self.table = scored.table;
        self.ranking = ranking;
        self.representation = representation;
        self.cursor = 0;
        self.recompute_count += 1;
        Ok(())
    }

    /// Profile of the candidate at the cursor, or `None` when complete.
    pub fn candidate_profile(&self, index: &BipartiteIndex) -> Result<Option<CandidateProfile>> {
        let NextCandidate::Candidate { position, author } = self.next_candidate()? else {
            return Ok(None);
        };
        let score = self
            .ranking
            .scores
            .iter()
            .find(|s| s.author == author)
            .expect("candidates come from the ranking");
        let mut articles: Vec<ArticleEvidence> = score
            .contributions
            .iter()
            .map(|c| {
                let article = index.document(c.doc);
                ArticleEvidence {
                    doc_id: article.doc_id.clone(),
                    title: article.title.clone(),
                    abstract_text: article.abstract_text.clone(),
                    authors: article.authors.iter().map(|a| a.name.clone()).collect(),
                    affiliations: article.affiliations.clone(),
                    date: article.date.clone(),
                    rank: self.ranked.rank_of(c.doc),
                    similarity: self.table.similarity(c.doc),
                    contribution: c.value,
                }
            })
            .collect();
        articles.sort_by_key(|a| a.rank);
        let record = index.author(author);
        Ok(Some(CandidateProfile {
            author_id: record.author_id.clone(),
            name: record.display_name.clone(),
            position,
            total_candidates: self.candidates.len(),
            score: score.score,
            method: self.ranking.method,
            recompute_epoch: self.recompute_count,
            articles,
        }))
    }
}
