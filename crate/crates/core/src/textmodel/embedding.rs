use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Pretrained word vectors sharing one dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dimension: usize,
    tokens: Vec<String>,
    data: Vec<f64>,
    lookup: HashMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingWarning {
    DuplicateToken { line: usize, token: String },
}

impl EmbeddingStore {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            tokens: Vec::new(),
            data: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    /// Adds a vector; returns false (and keeps the existing vector) when
    /// the token is already present.
    ///
    /// Panics if the vector length differs from the store dimension or a
    /// component is not finite.
    pub fn insert(&mut self, token: impl Into<String>, vector: &[f64]) -> bool {
        assert_eq!(vector.len(), self.dimension, "embedding dimension mismatch");
        assert!(vector.iter().all(|x| x.is_finite()), "non-finite embedding");
        let token = token.into();
        if self.lookup.contains_key(&token) {
            return false;
        }
        self.lookup.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(vector);
        true
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.lookup.contains_key(token)
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.lookup
            .get(token)
            .map(|&i| &self.data[i * self.dimension..(i + 1) * self.dimension])
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// SHA-256 over the dimension, tokens and vector bits, in store order.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.dimension as u64).to_le_bytes());
        for (i, token) in self.tokens.iter().enumerate() {
            hasher.update((token.len() as u64).to_le_bytes());
            hasher.update(token.as_bytes());
            for x in &self.data[i * self.dimension..(i + 1) * self.dimension] {
                hasher.update(x.to_bits().to_le_bytes());
            }
        }
        hex::encode(hasher.finalize())
    }

    /// Parses the word2vec text format: a `count dimension` header line,
    /// then `token v1 ... v_dim` per line.
    pub fn parse(reader: impl BufRead) -> Result<(Self, Vec<EmbeddingWarning>)> {
        let mut lines = reader.lines();
        let parse_err = |line: usize, message: String| Error::EmbeddingParse { line, message };

        let header = match lines.next() {
            Some(line) => line.map_err(|e| parse_err(1, e.to_string()))?,
            None => return Err(parse_err(1, "missing header".into())),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (count, dimension) = match fields.as_slice() {
            [c, d] => (
                c.parse::<usize>()
                    .map_err(|e| parse_err(1, format!("bad vocabulary count: {e}")))?,
                d.parse::<usize>()
                    .map_err(|e| parse_err(1, format!("bad dimension: {e}")))?,
            ),
            _ => return Err(parse_err(1, "header must be `count dimension`".into())),
        };
        if dimension == 0 {
            return Err(parse_err(1, "dimension must be positive".into()));
        }

        let mut store = Self::new(dimension);
        let mut warnings = Vec::new();
        let mut vector = Vec::with_capacity(dimension);
        let mut seen = 0usize;
        for (n, line) in lines.enumerate() {
            let line_no = n + 2;
            let line = line.map_err(|e| parse_err(line_no, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            seen += 1;
            if seen > count {
                return Err(parse_err(
                    line_no,
                    format!("more vectors than the {count} declared in the header"),
                ));
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().unwrap_or_default();
            vector.clear();
            for part in parts {
                let x: f64 = part
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad component {part:?}")))?;
                if !x.is_finite() {
                    return Err(parse_err(line_no, "non-finite component".into()));
                }
                vector.push(x);
            }
            if vector.len() != dimension {
                return Err(parse_err(
                    line_no,
                    format!("expected {dimension} components, found {}", vector.len()),
                ));
            }
            if !store.insert(token, &vector) {
                tracing::warn!(
                    line = line_no,
                    token,
                    "duplicate embedding token, keeping first"
                );
                warnings.push(EmbeddingWarning::DuplicateToken {
                    line: line_no,
                    token: token.to_string(),
                });
            }
        }
        if seen < count {
            return Err(parse_err(
                seen + 2,
                format!("header declares {count} vectors, found {seen}"),
            ));
        }
        Ok((store, warnings))
    }

    pub fn write(&self, mut writer: impl Write) -> std::io::Result<()> {
        writeln!(writer, "{} {}", self.len(), self.dimension)?;
        for (i, token) in self.tokens.iter().enumerate() {
            write!(writer, "{token}")?;
            for x in &self.data[i * self.dimension..(i + 1) * self.dimension] {
                write!(writer, " {x}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<(EmbeddingStore, Vec<EmbeddingWarning>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingStore::parse(BufReader::new(file))
}
