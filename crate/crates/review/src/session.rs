//! The persisted review session: which cut is shown, which clusters carry
//! which category, and the append-only log of every change.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use spamtax_core::wardcluster::Dendrogram;

use crate::error::{ReviewError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Label { cluster: usize, label: String },
    Unlabel { cluster: usize },
    Cut { k: usize, dropped: Vec<usize> },
    Export { path: PathBuf, total: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub timestamp: DateTime<Utc>,
    #[serde(flatten)]
    pub action: Action,
}

/// Cluster ids are dendrogram node ids: a leaf index for singletons, else
/// `n_leaves + merge step`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewSession {
    /// Unlabeled dataset whose documents are the dendrogram leaves, in order.
    pub dataset: PathBuf,
    pub dendrogram: PathBuf,
    pub vocabulary: PathBuf,
    /// Where the labeled dataset is written on export.
    pub export: PathBuf,
    pub initial_k: usize,
    pub k: usize,
    pub label_map: BTreeMap<usize, String>,
    pub audit_log: Vec<AuditEntry>,
}

impl ReviewSession {
    pub fn new(dataset: PathBuf, dendrogram: PathBuf, vocabulary: PathBuf, export: PathBuf, k: usize) -> Self {
        ReviewSession {
            dataset,
            dendrogram,
            vocabulary,
            export,
            initial_k: k,
            k,
            label_map: BTreeMap::new(),
            audit_log: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ReviewError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| ReviewError::Corrupt(format!("{}: {e}", path.display())))
    }

    /// Writes to a temporary sibling and renames it over `path`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let tmp = dir.join(format!(".{name}.tmp"));
        let mut json = serde_json::to_string_pretty(self).map_err(|e| ReviewError::Corrupt(e.to_string()))?;
        json.push('\n');
        let mut f = fs::File::create(&tmp).map_err(|e| ReviewError::io(&tmp, e))?;
        f.write_all(json.as_bytes()).map_err(|e| ReviewError::io(&tmp, e))?;
        f.sync_all().map_err(|e| ReviewError::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| ReviewError::io(path, e))
    }

    /// Resolves a session-relative path against the session file's directory.
    pub fn resolve(session_path: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            session_path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }

    pub fn record(&mut self, action: Action) {
        self.audit_log.push(AuditEntry {
            timestamp: Utc::now(),
            action,
        });
    }

    /// Sets `k`, dropping labels of clusters absent from the new cut.
    /// Returns the dropped cluster ids.
    pub fn apply_cut(&mut self, dendrogram: &Dendrogram, k: usize) -> Result<Vec<usize>> {
        let cut = dendrogram.cut(k)?;
        let dropped: Vec<usize> = self
            .label_map
            .keys()
            .copied()
            .filter(|node| cut.index_of_node(*node).is_none())
            .collect();
        for node in &dropped {
            self.label_map.remove(node);
        }
        self.k = k;
        Ok(dropped)
    }

    /// Re-applies the audit log to the initial state and returns the
    /// resulting `(k, label_map)`.
    pub fn replay(&self, dendrogram: &Dendrogram) -> Result<(usize, BTreeMap<usize, String>)> {
        let mut s = ReviewSession::new(
            self.dataset.clone(),
            self.dendrogram.clone(),
            self.vocabulary.clone(),
            self.export.clone(),
            self.initial_k,
        );
        for entry in &self.audit_log {
            match &entry.action {
                Action::Label { cluster, label } => {
                    s.label_map.insert(*cluster, label.clone());
                }
                Action::Unlabel { cluster } => {
                    s.label_map.remove(cluster);
                }
                Action::Cut { k, .. } => {
                    s.apply_cut(dendrogram, *k)?;
                }
                Action::Export { .. } => {}
            }
        }
        Ok((s.k, s.label_map))
    }

    /// Consistency with the dendrogram: valid `k`, labels only on clusters
    /// of the current cut, and a log that replays to the stored state.
    pub fn validate(&self, dendrogram: &Dendrogram) -> Result<()> {
        let cut = dendrogram.cut(self.k)?;
        if let Some(node) = self.label_map.keys().find(|n| cut.index_of_node(**n).is_none()) {
            return Err(ReviewError::Corrupt(format!("label on cluster {node}, which is not in the cut at k = {}", self.k)));
        }
        let (k, labels) = self.replay(dendrogram)?;
        if k != self.k || labels != self.label_map {
            return Err(ReviewError::Corrupt("audit log does not replay to the stored labels".into()));
        }
        Ok(())
    }
}
