//! Email ingestion, language tagging and the JSONL dataset format.

pub mod dataset;
pub mod ingest;
pub mod lang;
pub mod mime;

use serde::{Deserialize, Serialize};

pub use dataset::{load_dataset, manifest_path, save_dataset, DatasetManifest};
pub use ingest::{ingest, BodyMode, IngestReport, RawEmail};
pub use lang::{detect_language, LanguageDetector};

/// One email body with its language tag and optional category/cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(rename = "lang")]
    pub language: String,
    #[serde(rename = "lang_conf")]
    pub lang_confidence: f64,
    pub label: Option<String>,
    pub cluster: Option<usize>,
}

impl Document {
    /// Builds a document and tags it with the bundled language detector.
    pub fn detect(id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let (language, lang_confidence) = detect_language(&text);
        Document {
            id: id.into(),
            text,
            language,
            lang_confidence,
            label: None,
            cluster: None,
        }
    }
}

impl From<RawEmail> for Document {
    fn from(raw: RawEmail) -> Self {
        Document::detect(raw.id, raw.body_raw)
    }
}

/// Language-tags every raw email, in parallel, preserving order.
pub fn to_documents(raw: Vec<RawEmail>) -> Vec<Document> {
    use rayon::prelude::*;
    raw.into_par_iter().map(Document::from).collect()
}

/// Keeps the documents tagged English with at least `min_confidence`.
pub fn filter_english(docs: Vec<Document>, min_confidence: f64) -> Vec<Document> {
    docs.into_iter()
        .filter(|d| d.language == "en" && d.lang_confidence >= min_confidence)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, lang: &str, conf: f64) -> Document {
        Document {
            id: id.into(),
            text: String::new(),
            language: lang.into(),
            lang_confidence: conf,
            label: None,
            cluster: None,
        }
    }

    #[test]
    fn all_english_is_identity() {
        let docs: Vec<_> = (0..4).map(|i| doc(&i.to_string(), "en", 0.8)).collect();
        assert_eq!(filter_english(docs.clone(), 0.5), docs);
    }

    #[test]
    fn mixed_keeps_english_in_order() {
        let langs = ["en", "es", "en", "en", "es", "es", "en", "es", "en", "en"];
        let docs: Vec<_> = langs
            .iter()
            .enumerate()
            .map(|(i, l)| doc(&format!("d{i}"), l, 0.9))
            .collect();
        let kept: Vec<_> = filter_english(docs, 0.5).into_iter().map(|d| d.id).collect();
        assert_eq!(kept, ["d0", "d2", "d3", "d6", "d8", "d9"]);
    }

    #[test]
    fn full_confidence_boundary() {
        let docs = vec![doc("a", "en", 1.0), doc("b", "en", 0.999_999), doc("c", "und", 0.0)];
        let kept: Vec<_> = filter_english(docs, 1.0).into_iter().map(|d| d.id).collect();
        assert_eq!(kept, ["a"]);
    }

    #[test]
    fn detected_documents_filter_by_language() {
        let docs = vec![
            Document::detect("1", "Dear friend, I am writing to inform you that you have won a prize"),
            Document::detect("2", "Hola amigo, tenemos una oferta especial para ti hoy mismo"),
            Document::detect("3", "short"),
        ];
        assert_eq!(docs[2].language, "und");
        assert_eq!(docs[2].lang_confidence, 0.0);
        let kept: Vec<_> = filter_english(docs, 0.5).into_iter().map(|d| d.id).collect();
        assert_eq!(kept, ["1"]);
    }
}
