//! Body normalization and tokenization.
//!
//! Lowercase, turn everything that is not an ASCII letter into a separator,
//! split, drop single letters, drop stopwords. No stemming.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

/// The bundled English stopword list (179 entries).
pub const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Default minimum token count a document needs to be kept.
pub const DEFAULT_MIN_WORDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenDoc {
    pub id: String,
    pub tokens: Vec<String>,
    pub token_count: usize,
}

impl TokenDoc {
    pub fn new(id: impl Into<String>, tokens: Vec<String>) -> Self {
        let token_count = tokens.len();
        TokenDoc {
            id: id.into(),
            tokens,
            token_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS)
    }

    /// One lowercase term per line; blank lines are ignored.
    pub fn parse(contents: &str) -> Self {
        Stopwords(
            contents
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let sw = Self::parse(&text);
        if sw.is_empty() {
            return Err(Error::Validation(format!("stopword file {} is empty", path.display())));
        }
        Ok(sw)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Token list of a raw text.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    let normalized: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphabetic() { c } else { ' ' })
        .collect();
    normalized
        .split_whitespace()
        .filter(|t| t.len() >= 2 && !stopwords.contains(t))
        .map(str::to_owned)
        .collect()
}

pub fn preprocess(doc: &Document, stopwords: &Stopwords) -> TokenDoc {
    TokenDoc::new(doc.id.clone(), tokenize(&doc.text, stopwords))
}

/// Preprocesses many documents in parallel, preserving order.
pub fn preprocess_all(docs: &[Document], stopwords: &Stopwords) -> Vec<TokenDoc> {
    use rayon::prelude::*;
    docs.par_iter().map(|d| preprocess(d, stopwords)).collect()
}

pub fn filter_min_words(docs: Vec<TokenDoc>, min_words: usize) -> Vec<TokenDoc> {
    docs.into_iter().filter(|d| d.token_count >= min_words).collect()
}
