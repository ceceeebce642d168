use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::mime;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEmail {
    pub id: String,
    pub source_path: String,
    pub body_raw: String,
}

/// How each input file is turned into a body.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BodyMode {
    /// The file already is the plain-text body.
    #[default]
    Plain,
    /// Parse as an RFC 822 message and extract the text body; files that do
    /// not parse are taken verbatim.
    Mime,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestIssue {
    pub source: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub issues: Vec<IngestIssue>,
}

impl IngestReport {
    fn issue(&mut self, source: impl Into<String>, message: impl Into<String>) {
        self.issues.push(IngestIssue {
            source: source.into(),
            message: message.into(),
        });
    }
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: Option<String>,
    #[serde(alias = "body")]
    text: Option<String>,
}

fn is_jsonl(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "jsonl")
}

fn expand(paths: &[PathBuf], report: &mut IngestReport) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut stack = vec![path.clone()];
            let mut found = Vec::new();
            while let Some(dir) = stack.pop() {
                match fs::read_dir(&dir) {
                    Ok(entries) => {
                        for entry in entries.flatten() {
                            let p = entry.path();
                            if p.is_dir() {
                                stack.push(p);
                            } else {
                                found.push(p);
                            }
                        }
                    }
                    Err(e) => report.issue(dir.display().to_string(), e.to_string()),
                }
            }
            found.sort();
            files.extend(found);
        } else {
            files.push(path.clone());
        }
    }
    files
}

/// Reads one email per file (directories are walked in sorted order) or the
/// records of a single JSONL file with `id` and `text` (or `body`) fields.
///
/// Unreadable files, malformed records and duplicate ids are recorded in the
/// report and skipped. Fails only when nothing could be read.
pub fn ingest(paths: &[PathBuf], mode: BodyMode) -> Result<(Vec<RawEmail>, IngestReport)> {
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut out = Vec::new();

    if let [single] = paths {
        if is_jsonl(single) && single.is_file() {
            ingest_jsonl(single, &mut seen, &mut out, &mut report)?;
            return finish(out, report);
        }
    }

    for file in expand(paths, &mut report) {
        let source = file.display().to_string();
        let bytes = match fs::read(&file) {
            Ok(b) => b,
            Err(e) => {
                report.issue(source, e.to_string());
                continue;
            }
        };
        let Some(id) = file.file_stem().map(|s| s.to_string_lossy().into_owned()) else {
            report.issue(source, "cannot derive an id from the file name");
            continue;
        };
        if !seen.insert(id.clone()) {
            report.issue(source, format!("duplicate id {id:?}"));
            continue;
        }
        let body_raw = match mode {
            BodyMode::Plain => String::from_utf8_lossy(&bytes).into_owned(),
            BodyMode::Mime => mime::extract_body(&bytes)
                .unwrap_or_else(|| String::from_utf8_lossy(&bytes).into_owned()),
        };
        out.push(RawEmail {
            id,
            source_path: source,
            body_raw,
        });
    }
    finish(out, report)
}

fn ingest_jsonl(
    path: &Path,
    seen: &mut HashSet<String>,
    out: &mut Vec<RawEmail>,
    report: &mut IngestReport,
) -> Result<()> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    let source_path = path.display().to_string();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let source = format!("{source_path}:{lineno}");
        let record: JsonlRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                report.issue(source, e.to_string());
                continue;
            }
        };
        let Some(id) = record.id.filter(|id| !id.is_empty()) else {
            report.issue(source, "missing id");
            continue;
        };
        if !seen.insert(id.clone()) {
            report.issue(source, format!("duplicate id {id:?}"));
            continue;
        }
        out.push(RawEmail {
            id,
            source_path: source_path.clone(),
            body_raw: record.text.unwrap_or_default(),
        });
    }
    Ok(())
}

fn finish(out: Vec<RawEmail>, mut report: IngestReport) -> Result<(Vec<RawEmail>, IngestReport)> {
    if out.is_empty() {
        let detail = match report.issues.first() {
            Some(first) => format!("nothing readable ({} issues, first: {})", report.issues.len(), first.message),
            None => "no input files found".to_string(),
        };
        return Err(Error::NoInputs(detail));
    }
    report.accepted = out.len();
    Ok((out, report))
}
