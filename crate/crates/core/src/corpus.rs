//! Word embeddings, corpus frequencies and lexicon membership.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Word vectors in the text format `vocab_size dim` followed by
/// `word v1 ... vdim` rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn parse(source: &str) -> Result<EmbeddingTable> {
        const WHAT: &str = "embeddings";
        let mut lines = source.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(WHAT, 1, "missing header"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let (vocab, dim) = match head.as_slice() {
            [v, d] => (
                v.parse::<usize>().map_err(|_| Error::parse(WHAT, 1, "bad vocabulary size"))?,
                d.parse::<usize>().map_err(|_| Error::parse(WHAT, 1, "bad dimension"))?,
            ),
            _ => return Err(Error::parse(WHAT, 1, "header must be `vocab_size dim`")),
        };
        if dim == 0 {
            return Err(Error::parse(WHAT, 1, "dimension must be positive"));
        }
        let mut entries = Vec::with_capacity(vocab);
        for (i, line) in lines {
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default().to_string();
            let values = parts
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(WHAT, i + 1, format!("bad number: {e}")))?;
            if values.len() != dim {
                return Err(Error::parse(
                    WHAT,
                    i + 1,
                    format!("expected {dim} values, found {}", values.len()),
                ));
            }
            entries.push((i + 1, word, values));
        }
        if entries.len() != vocab {
            return Err(Error::parse(
                WHAT,
                1,
                format!("header announces {vocab} rows, found {}", entries.len()),
            ));
        }
        let mut table = EmbeddingTable {
            dim,
            ..Default::default()
        };
        for (line, word, values) in entries {
            table
                .insert(word, values)
                .map_err(|e| Error::parse(WHAT, line, e.to_string()))?;
        }
        Ok(table)
    }

    pub fn new(dim: usize) -> EmbeddingTable {
        EmbeddingTable {
            dim,
            ..Default::default()
        }
    }

    pub fn insert(&mut self, word: String, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::validation(format!("{word}: vector length {} != {}", vector.len(), self.dim)));
        }
        if vector.iter().all(|v| *v == 0.0) || vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(format!("{word}: zero or non-finite vector")));
        }
        if self.index.contains_key(&word) {
            return Err(Error::validation(format!("duplicate word {word:?}")));
        }
        self.index.insert(word, self.vectors.len());
        self.vectors.push(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vectors[i].as_slice())
    }

    /// `1 - arccos(cos(x, y)) / pi`, or `None` when either word is unknown.
    pub fn angular_similarity(&self, x: &str, y: &str) -> Option<f64> {
        let (a, b) = (self.get(x)?, self.get(y)?);
        let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
        let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cos = (dot / (na * nb)).clamp(-1.0, 1.0);
        Some(1.0 - cos.acos() / PI)
    }
}

/// Token and document counts per word.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, (u64, u64)>,
}

impl FrequencyTable {
    /// Counts tokens over documents; each document contributes at most one
    /// to a word's document count.
    pub fn ingest<D, T, S>(documents: D) -> FrequencyTable
    where
        D: IntoIterator<Item = T>,
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut table = FrequencyTable::default();
        for doc in documents {
            table.add_document(doc);
        }
        table
    }

    pub fn add_document<T, S>(&mut self, tokens: T)
    where
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        for tok in tokens {
            let tok = tok.as_ref();
            if tok.is_empty() {
                continue;
            }
            let e = self.counts.entry(tok.to_string()).or_insert((0, 0));
            e.0 += 1;
            if seen.insert(tok.to_string()) {
                e.1 += 1;
            }
        }
    }

    pub fn counts(&self, word: &str) -> (u64, u64) {
        self.counts.get(word).copied().unwrap_or((0, 0))
    }

    pub fn insert(&mut self, word: impl Into<String>, tokens: u64, documents: u64) -> Result<()> {
        if documents > tokens {
            return Err(Error::validation("document count exceeds token count"));
        }
        self.counts.insert(word.into(), (tokens, documents));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Parses `word TAB token_count TAB doc_count` lines.
    pub fn parse(source: &str) -> Result<FrequencyTable> {
        const WHAT: &str = "frequencies";
        let mut table = FrequencyTable::default();
        for (i, line) in source.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let [word, tc, dc] = f.as_slice() else {
                return Err(Error::parse(WHAT, i + 1, "expected 3 tab-separated fields"));
            };
            let num = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::parse(WHAT, i + 1, format!("bad count {s:?}")))
            };
            table
                .insert(*word, num(tc)?, num(dc)?)
                .map_err(|e| Error::parse(WHAT, i + 1, e.to_string()))?;
        }
        Ok(table)
    }

    /// TSV sorted by word.
    pub fn to_tsv(&self) -> String {
        let sorted: BTreeMap<_, _> = self.counts.iter().collect();
        let mut out = String::new();
        for (w, (t, d)) in sorted {
            let _ = writeln!(out, "{w}\t{t}\t{d}");
        }
        out
    }
}

/// A set of stems, one per line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lexicon {
    stems: HashSet<String>,
}

impl Lexicon {
    pub fn parse(source: &str) -> Lexicon {
        Lexicon {
            stems: source
                .lines()
                .map(|l| l.split('\t').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect(),
        }
    }

    pub fn from_stems<I: IntoIterator<Item = S>, S: Into<String>>(stems: I) -> Lexicon {
        Lexicon {
            stems: stems.into_iter().map(Into::into).collect(),
        }
    }

    pub fn contains(&self, stem: &str) -> bool {
        self.stems.contains(stem)
    }

    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.stems.iter().map(String::as_str)
    }
}

/// Everything feature extraction reads from the corpus side.
#[derive(Clone, Debug, Default)]
pub struct CorpusStore {
    pub embeddings: EmbeddingTable,
    pub frequencies: FrequencyTable,
    pub small: Lexicon,
    pub large: Lexicon,
}

impl CorpusStore {
    /// Builds the store, warning when the small lexicon is not contained in
    /// the large one.
    pub fn new(embeddings: EmbeddingTable, frequencies: FrequencyTable, small: Lexicon, large: Lexicon) -> CorpusStore {
        let outside = small.iter().filter(|s| !large.contains(s)).count();
        if outside > 0 {
            log::warn!("{outside} stems of the small lexicon are missing from the large lexicon");
        }
        CorpusStore {
            embeddings,
            frequencies,
            small,
            large,
        }
    }
}
