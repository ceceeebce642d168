//! Vocabulary fitting and sparse BOW / TF-IDF encoding.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::textprep::TokenDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Bow,
    Tfidf,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Bow => "bow",
            Scheme::Tfidf => "tfidf",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bow" => Ok(Scheme::Bow),
            "tfidf" | "tf-idf" => Ok(Scheme::Tfidf),
            other => Err(Error::InvalidArgument(format!("unknown vectorizer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorizerConfig {
    pub max_features: usize,
    pub min_df: usize,
    /// Only unigrams are supported.
    pub ngram: usize,
    pub scheme: Scheme,
}

impl VectorizerConfig {
    pub fn new(scheme: Scheme) -> Self {
        VectorizerConfig {
            max_features: 9000,
            min_df: 3,
            ngram: 1,
            scheme,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_features == 0 || self.min_df == 0 {
            return Err(Error::InvalidArgument(
                "max_features and min_df must be at least 1".into(),
            ));
        }
        if self.ngram != 1 {
            return Err(Error::InvalidArgument("only ngram = 1 is supported".into()));
        }
        Ok(())
    }
}

impl Default for VectorizerConfig {
    fn default() -> Self {
        Self::new(Scheme::Tfidf)
    }
}

/// Retained terms with their document frequencies. Indices follow
/// lexicographic term order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    term_to_index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    idf: Vec<f64>,
    n_docs: usize,
    config: VectorizerConfig,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
    config: VectorizerConfig,
}

/// Smoothed inverse document frequency, `ln((1 + n) / (1 + df)) + 1`.
pub fn idf(n_docs: usize, doc_freq: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + doc_freq as f64)).ln() + 1.0
}

impl Vocabulary {
    fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>, n_docs: usize, config: VectorizerConfig) -> Self {
        let term_to_index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let idf = doc_freq.iter().map(|&df| idf(n_docs, df)).collect();
        Vocabulary {
            terms,
            term_to_index,
            doc_freq,
            idf,
            n_docs,
            config,
        }
    }

    /// Keeps terms with `doc_freq >= min_df`, then the `max_features` most
    /// frequent by document frequency (ties lexicographic).
    pub fn fit(docs: &[TokenDoc], config: VectorizerConfig) -> Result<Self> {
        config.validate()?;
        if docs.is_empty() {
            return Err(Error::InvalidArgument("cannot fit a vocabulary on zero documents".into()));
        }
        let mut df: HashMap<&str, usize> = HashMap::new();
        for d in docs {
            let unique: HashSet<&str> = d.tokens.iter().map(String::as_str).collect();
            for t in unique {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let mut candidates: Vec<(&str, usize)> =
            df.into_iter().filter(|&(_, n)| n >= config.min_df).collect();
        if candidates.is_empty() {
            return Err(Error::EmptyVocabulary { min_df: config.min_df });
        }
        candidates.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        candidates.truncate(config.max_features);
        candidates.sort_by(|a, b| a.0.cmp(b.0));

        let (terms, doc_freq) = candidates
            .into_iter()
            .map(|(t, n)| (t.to_owned(), n))
            .unzip();
        Ok(Self::from_parts(terms, doc_freq, docs.len(), config))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.term_to_index.get(term).copied()
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn config(&self) -> &VectorizerConfig {
        &self.config
    }

    pub fn scheme(&self) -> Scheme {
        self.config.scheme
    }

    fn to_file(&self) -> VocabularyFile {
        VocabularyFile {
            terms: self.terms.clone(),
            doc_freq: self.doc_freq.clone(),
            n_docs: self.n_docs,
            config: self.config,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("vocabulary serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let f: VocabularyFile = serde_json::from_str(json)?;
        if f.terms.len() != f.doc_freq.len() {
            return Err(Error::Validation("terms and doc_freq lengths differ".into()));
        }
        if f.terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("vocabulary terms are not strictly sorted".into()));
        }
        f.config.validate()?;
        Ok(Self::from_parts(f.terms, f.doc_freq, f.n_docs, f.config))
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Sorted `(index, value)` pairs with strictly increasing indices and
/// nonzero values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector { dim, entries: Vec::new() }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SparseVector {
            dim: self.dim,
            entries: self.entries.iter().map(|&(i, v)| (i, v * factor)).collect(),
        }
    }

    /// Squared Euclidean distance by merging the two index lists.
    pub fn sq_distance(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    acc += a[i].1 * a[i].1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    acc += b[j].1 * b[j].1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let d = a[i].1 - b[j].1;
                    acc += d * d;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc += a[i..].iter().map(|(_, v)| v * v).sum::<f64>();
        acc += b[j..].iter().map(|(_, v)| v * v).sum::<f64>();
        acc
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

fn term_counts(doc: &TokenDoc, vocab: &Vocabulary) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for t in &doc.tokens {
        if let Some(i) = vocab.index_of(t) {
            *counts.entry(i).or_insert(0) += 1;
        }
    }
    counts
}

/// Raw in-vocabulary term counts.
pub fn encode_bow(doc: &TokenDoc, vocab: &Vocabulary) -> SparseVector {
    SparseVector {
        dim: vocab.len(),
        entries: term_counts(doc, vocab)
            .into_iter()
            .map(|(i, n)| (i, n as f64))
            .collect(),
    }
}

/// Raw count times smoothed idf, L2-normalized.
pub fn encode_tfidf(doc: &TokenDoc, vocab: &Vocabulary) -> SparseVector {
    let idf = vocab.idf();
    let mut entries: Vec<(usize, f64)> = term_counts(doc, vocab)
        .into_iter()
        .map(|(i, n)| (i, n as f64 * idf[i]))
        .collect();
    let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for e in &mut entries {
            e.1 /= norm;
        }
    }
    SparseVector {
        dim: vocab.len(),
        entries,
    }
}

pub fn encode(doc: &TokenDoc, vocab: &Vocabulary, scheme: Scheme) -> SparseVector {
    match scheme {
        Scheme::Bow => encode_bow(doc, vocab),
        Scheme::Tfidf => encode_tfidf(doc, vocab),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusMatrix {
    pub doc_ids: Vec<String>,
    pub rows: Vec<SparseVector>,
    pub dim: usize,
    pub vocab_hash: String,
}

impl CorpusMatrix {
    /// Builds a matrix from explicit rows; all rows must share `dim`.
    pub fn from_rows(doc_ids: Vec<String>, rows: Vec<SparseVector>, dim: usize) -> Result<Self> {
        if doc_ids.len() != rows.len() {
            return Err(Error::Validation(format!(
                "{} ids for {} rows",
                doc_ids.len(),
                rows.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.dim != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: r.dim });
        }
        Ok(CorpusMatrix {
            doc_ids,
            rows,
            dim,
            vocab_hash: String::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn encode_corpus(docs: &[TokenDoc], vocab: &Vocabulary, scheme: Scheme) -> CorpusMatrix {
    use rayon::prelude::*;
    CorpusMatrix {
        doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        rows: docs.par_iter().map(|d| encode(d, vocab, scheme)).collect(),
        dim: vocab.len(),
        vocab_hash: vocab.content_hash(),
    }
}
