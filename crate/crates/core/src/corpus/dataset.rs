//! JSONL dataset files with a `<name>.manifest.json` sidecar.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Document;
use crate::error::{Error, Result};

/// Category counts of a dataset. An unlabeled dataset has no categories and
/// only a total; a labeled one has `total == sum(counts)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub categories: Vec<String>,
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
}

impl DatasetManifest {
    /// Derives the manifest from document labels. Either every document
    /// carries a label or none does.
    pub fn from_documents(docs: &[Document]) -> Result<Self> {
        let labeled = docs.iter().filter(|d| d.label.is_some()).count();
        if labeled != 0 && labeled != docs.len() {
            return Err(Error::Validation(format!(
                "{} of {} documents are labeled; a dataset is either fully labeled or unlabeled",
                labeled,
                docs.len()
            )));
        }
        let mut counts = BTreeMap::new();
        for label in docs.iter().filter_map(|d| d.label.as_ref()) {
            *counts.entry(label.clone()).or_insert(0) += 1;
        }
        Ok(DatasetManifest {
            categories: counts.keys().cloned().collect(),
            counts,
            total: docs.len(),
        })
    }

    pub fn is_labeled(&self) -> bool {
        !self.categories.is_empty()
    }

    /// Percentage of the total per category, in category order.
    pub fn percentages(&self) -> Vec<(String, f64)> {
        self.categories
            .iter()
            .map(|c| {
                let n = self.counts.get(c).copied().unwrap_or(0);
                let pct = if self.total == 0 {
                    0.0
                } else {
                    100.0 * n as f64 / self.total as f64
                };
                (c.clone(), pct)
            })
            .collect()
    }

    fn check_self(&self) -> Result<()> {
        let keys: Vec<&String> = self.counts.keys().collect();
        let mut cats: Vec<&String> = self.categories.iter().collect();
        cats.sort();
        if keys != cats {
            return Err(Error::Validation(format!(
                "manifest categories {:?} do not match count keys {:?}",
                self.categories, keys
            )));
        }
        let sum: usize = self.counts.values().sum();
        if self.is_labeled() && sum != self.total {
            return Err(Error::Validation(format!(
                "manifest counts sum to {sum} but total is {}",
                self.total
            )));
        }
        Ok(())
    }

    /// Checks the manifest against the documents it describes.
    pub fn validate(&self, docs: &[Document]) -> Result<()> {
        self.check_self()?;
        if self.total != docs.len() {
            return Err(Error::Validation(format!(
                "manifest total is {} but the dataset has {} documents",
                self.total,
                docs.len()
            )));
        }
        for d in docs {
            if let Some(label) = &d.label {
                if !self.counts.contains_key(label) {
                    return Err(Error::Validation(format!(
                        "document {:?} has undeclared label {label:?}",
                        d.id
                    )));
                }
            }
        }
        let actual = DatasetManifest::from_documents(docs)?;
        if actual.counts != self.counts {
            return Err(Error::Validation(format!(
                "manifest counts {:?} differ from document labels {:?}",
                self.counts, actual.counts
            )));
        }
        Ok(())
    }
}

/// `data/d.jsonl` → `data/d.manifest.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.manifest.json"))
}

pub fn save_dataset(docs: &[Document], manifest: &DatasetManifest, path: &Path) -> Result<()> {
    manifest.validate(docs)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for d in docs {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let mpath = manifest_path(path);
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    fs::write(&mpath, json).map_err(|e| Error::io(&mpath, e))?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<(Vec<Document>, DatasetManifest)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            detail: e.to_string(),
        })?;
        docs.push(doc);
    }

    let mpath = manifest_path(path);
    let mtext = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&mtext).map_err(|e| Error::Parse {
        path: mpath.clone(),
        line: e.line(),
        detail: e.to_string(),
    })?;
    manifest.validate(&docs)?;
    Ok((docs, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(n: usize, labeled: bool) -> Vec<Document> {
        (0..n)
            .map(|i| Document {
                id: format!("e{i}"),
                text: format!("text número {i} ✓"),
                language: "en".into(),
                lang_confidence: 0.5 + i as f64 / 17.0,
                label: labeled.then(|| ["ham", "spam"][i % 2].to_string()),
                cluster: labeled.then_some(i % 3),
            })
            .collect()
    }

    #[test]
    fn round_trip_five() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let d = docs(5, true);
        let m = DatasetManifest::from_documents(&d).unwrap();
        save_dataset(&d, &m, &path).unwrap();
        let first = fs::read(&path).unwrap();
        let (d2, m2) = load_dataset(&path).unwrap();
        assert_eq!(d, d2);
        assert_eq!(m, m2);
        save_dataset(&d2, &m2, &path).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());
        assert!(dir.path().join("d.manifest.json").exists());
    }

    #[test]
    fn truncated_line_names_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let d = docs(5, false);
        save_dataset(&d, &DatasetManifest::from_documents(&d).unwrap(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let half = lines[2].len() / 2;
        lines[2].truncate(half);
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        let err = load_dataset(&path).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn total_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let d = docs(10, false);
        save_dataset(&d, &DatasetManifest::from_documents(&d).unwrap(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let kept: Vec<&str> = text.lines().take(9).collect();
        fs::write(&path, kept.join("\n") + "\n").unwrap();
        assert!(matches!(load_dataset(&path), Err(Error::Validation(_))));
    }

    #[test]
    fn partially_labeled_is_rejected() {
        let mut d = docs(4, true);
        d[1].label = None;
        assert!(DatasetManifest::from_documents(&d).is_err());
    }

    #[test]
    fn undeclared_label_is_rejected() {
        let d = docs(4, true);
        let mut m = DatasetManifest::from_documents(&d).unwrap();
        m.categories = vec!["ham".into(), "other".into()];
        m.counts = BTreeMap::from([("ham".into(), 2), ("other".into(), 2)]);
        assert!(m.validate(&d).is_err());
    }

    #[test]
    fn table_one_percentages() {
        let m = DatasetManifest {
            categories: vec!["health_tech".into(), "personal_scams".into(), "sexual_content".into()],
            counts: BTreeMap::from([
                ("health_tech".into(), 583),
                ("personal_scams".into(), 3703),
                ("sexual_content".into(), 7176),
            ]),
            total: 11462,
        };
        m.check_self().unwrap();
        let p: Vec<f64> = m.percentages().into_iter().map(|(_, p)| (p * 100.0).round() / 100.0).collect();
        assert_eq!(p, [5.09, 32.31, 62.61]);
    }
}
