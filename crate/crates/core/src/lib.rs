//! Spam email taxonomy toolkit: ingestion and language filtering, text
//! preprocessing, sparse BOW/TF-IDF encoding, Ward hierarchical clustering
//! for building a labeled corpus, and the NB / LR / linear-SVM classifiers
//! with cross-validated evaluation and latency benchmarking.

pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod evalkit;
pub mod pipeline;
pub mod textprep;
pub mod vectorspace;
pub mod wardcluster;

pub use error::{Error, Result};
