//! Ranking quality on labeled queries: mean reciprocal rank and
//! precision at k.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, RankingConfig};
use crate::error::{Error, Result};

/// A labeled query: `{title, abstract, relevant: [author_id]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub relevant: Vec<String>,
}

pub fn load_eval_records(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: EvalRecord = serde_json::from_str(&line).map_err(|e| Error::CorpusLine {
            line: n + 1,
            message: e.to_string(),
        })?;
        if record.relevant.is_empty() {
            return Err(Error::CorpusLine {
                line: n + 1,
                message: "relevant set is empty".into(),
            });
        }
        records.push(record);
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "mrr")]
    Mrr,
    #[serde(rename = "p@k")]
    PrecisionAt(usize),
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("mrr") {
            return Ok(Metric::Mrr);
        }
        s.strip_prefix("p@")
            .or_else(|| s.strip_prefix("P@"))
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k > 0)
            .map(Metric::PrecisionAt)
            .ok_or_else(|| format!("unknown metric {s:?} (expected mrr or p@<k>)"))
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Mrr => f.write_str("mrr"),
            Metric::PrecisionAt(k) => write!(f, "p@{k}"),
        }
    }
}

/// 1 / position of the first relevant item, 0 if none is ranked.
pub fn reciprocal_rank(ranked: &[usize], relevant: &BTreeSet<usize>) -> f64 {
    ranked
        .iter()
        .position(|a| relevant.contains(a))
        .map_or(0.0, |p| 1.0 / (p + 1) as f64)
}

/// Fraction of the first `k` positions holding a relevant item.
pub fn precision_at_k(ranked: &[usize], relevant: &BTreeSet<usize>, k: usize) -> f64 {
    let hits = ranked
        .iter()
        .take(k)
        .filter(|a| relevant.contains(a))
        .count();
    hits as f64 / k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    /// 0-based position in the input file.
    pub record: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: Metric,
    /// Mean over evaluated queries; 0 when none was evaluated.
    pub value: f64,
    pub evaluated: usize,
    pub skipped: Vec<String>,
    pub per_query: Vec<QueryOutcome>,
}

/// Scores every record and aggregates `metric`. Records naming an unknown
/// author, or whose query cannot be represented, are skipped with a
/// warning.
pub fn evaluate(
    engine: &Engine,
    records: &[EvalRecord],
    config: &RankingConfig,
    metric: Metric,
) -> EvalReport {
    let mut per_query = Vec::new();
    let mut skipped = Vec::new();
    for (i, record) in records.iter().enumerate() {
        let relevant: Option<BTreeSet<usize>> = record
            .relevant
            .iter()
            .map(|id| engine.index().author_index(id))
            .collect();
        let Some(relevant) = relevant else {
            let msg = format!("record {}: unknown relevant author id", i + 1);
            tracing::warn!("{msg}");
            skipped.push(msg);
            continue;
        };
        let scored = match engine.query(&record.title, &record.abstract_text, config) {
            Ok((_, _, scored)) => scored,
            Err(e) => {
                let msg = format!("record {}: {e}", i + 1);
                tracing::warn!("{msg}");
                skipped.push(msg);
                continue;
            }
        };
        let ranked: Vec<usize> = scored.ranking.authors().collect();
        let value = match metric {
            Metric::Mrr => reciprocal_rank(&ranked, &relevant),
            Metric::PrecisionAt(k) => precision_at_k(&ranked, &relevant, k),
        };
        per_query.push(QueryOutcome { record: i, value });
    }
    let value = if per_query.is_empty() {
        0.0
    } else {
        per_query.iter().map(|q| q.value).sum::<f64>() / per_query.len() as f64
    };
    EvalReport {
        metric,
        value,
        evaluated: per_query.len(),
        skipped,
        per_query,
    }
}
