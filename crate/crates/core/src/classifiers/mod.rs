//! Multinomial naive Bayes, L2-regularized logistic regression and a linear
//! soft-margin SVM. The linear models are one-vs-rest over the categories.

mod lbfgs;
pub mod lr;
pub mod nb;
pub mod svm;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vectorspace::{CorpusMatrix, SparseVector, Vocabulary};

pub use lr::{train_lr, LogisticObjective};
pub use nb::train_nb;
pub use svm::{hinge_objective, train_svm};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Nb,
    Lr,
    Svm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Nb, ModelKind::Lr, ModelKind::Svm];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Nb => "nb",
            ModelKind::Lr => "lr",
            ModelKind::Svm => "svm",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nb" => Ok(ModelKind::Nb),
            "lr" => Ok(ModelKind::Lr),
            "svm" => Ok(ModelKind::Svm),
            other => Err(Error::InvalidArgument(format!("unknown classifier {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeightMode {
    Balanced,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha: f64,
    pub class_weight: ClassWeightMode,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1000.0,
            alpha: 1.0,
            class_weight: ClassWeightMode::Balanced,
            max_iter: 1000,
            tol: 1e-4,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("C", self.c)?;
        positive("alpha", self.alpha)?;
        positive("tol", self.tol)?;
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// `w_c = N / (K * N_c)` for every category present in `labels`.
pub fn balanced_weights<S: AsRef<str>>(labels: &[S]) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l.as_ref().to_owned()).or_insert(0) += 1;
    }
    let (n, k) = (labels.len() as f64, counts.len() as f64);
    counts
        .into_iter()
        .map(|(c, nc)| (c, n / (k * nc as f64)))
        .collect()
}

/// Training rows with labels mapped to indices into the sorted category list.
pub(crate) struct Encoded<'a> {
    pub rows: &'a [SparseVector],
    pub dim: usize,
    pub categories: Vec<String>,
    pub y: Vec<usize>,
}

impl<'a> Encoded<'a> {
    pub fn new<S: AsRef<str>>(matrix: &'a CorpusMatrix, labels: &[S]) -> Result<Self> {
        if matrix.len() != labels.len() {
            return Err(Error::Validation(format!(
                "{} rows but {} labels",
                matrix.len(),
                labels.len()
            )));
        }
        if matrix.is_empty() {
            return Err(Error::Validation("cannot train on an empty matrix".into()));
        }
        let mut categories: Vec<String> = labels.iter().map(|l| l.as_ref().to_owned()).collect();
        categories.sort();
        categories.dedup();
        let y = labels
            .iter()
            .map(|l| categories.binary_search_by(|c| c.as_str().cmp(l.as_ref())).unwrap())
            .collect();
        Ok(Encoded {
            rows: &matrix.rows,
            dim: matrix.dim,
            categories,
            y,
        })
    }

    /// Per-sample loss multiplier from the true category's class weight.
    pub fn sample_weights(&self, mode: ClassWeightMode) -> Vec<f64> {
        match mode {
            ClassWeightMode::None => vec![1.0; self.y.len()],
            ClassWeightMode::Balanced => {
                let k = self.categories.len();
                let mut counts = vec![0usize; k];
                for &c in &self.y {
                    counts[c] += 1;
                }
                let n = self.y.len() as f64;
                self.y.iter().map(|&c| n / (k as f64 * counts[c] as f64)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Params {
    NaiveBayes {
        log_priors: Vec<f64>,
        /// `[category][term]`
        log_likelihood: Vec<Vec<f64>>,
        alpha: f64,
    },
    Linear {
        /// `[category][term]`
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
        #[serde(rename = "C")]
        c: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub format_version: u32,
    pub kind: ModelKind,
    pub categories: Vec<String>,
    pub vocab_hash: String,
    pub n_features: usize,
    #[serde(flatten)]
    pub params: Params,
    pub train_config: TrainConfig,
    pub converged: bool,
    /// Solver iterations per one-vs-rest subproblem; empty for NB.
    #[serde(default)]
    pub iterations: Vec<usize>,
}

impl Model {
    pub fn train<S: AsRef<str>>(
        kind: ModelKind,
        matrix: &CorpusMatrix,
        labels: &[S],
        config: &TrainConfig,
    ) -> Result<Self> {
        match kind {
            ModelKind::Nb => train_nb(matrix, labels, config),
            ModelKind::Lr => train_lr(matrix, labels, config),
            ModelKind::Svm => train_svm(matrix, labels, config),
        }
    }

    fn check_dim(&self, v: &SparseVector) -> Result<()> {
        if v.dim != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: v.dim,
            });
        }
        Ok(())
    }

    pub fn check_vocab(&self, vocab: &Vocabulary) -> Result<()> {
        let got = vocab.content_hash();
        if got != self.vocab_hash {
            return Err(Error::VocabMismatch {
                expected: self.vocab_hash.clone(),
                got,
            });
        }
        Ok(())
    }

    /// Per-category scores in category order.
    pub fn scores(&self, v: &SparseVector) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        Ok(match &self.params {
            Params::NaiveBayes { log_priors, log_likelihood, .. } => log_priors
                .iter()
                .zip(log_likelihood)
                .map(|(p, ll)| p + v.dot_dense(ll))
                .collect(),
            Params::Linear { weights, biases, .. } => weights
                .iter()
                .zip(biases)
                .map(|(w, b)| v.dot_dense(w) + b)
                .collect(),
        })
    }

    pub fn predict_scores(&self, v: &SparseVector) -> Result<BTreeMap<String, f64>> {
        Ok(self.categories.iter().cloned().zip(self.scores(v)?).collect())
    }

    /// Index of the best category; ties go to the lower index.
    pub fn predict_index(&self, v: &SparseVector) -> Result<usize> {
        Ok(argmax(&self.scores(v)?))
    }

    pub fn predict(&self, v: &SparseVector) -> Result<&str> {
        Ok(&self.categories[self.predict_index(v)?])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: Model = serde_json::from_str(json)?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion(self.format_version));
        }
        let k = self.categories.len();
        let bad = |what: &str| Err(Error::Validation(format!("model {what} do not match its {k} categories")));
        let rows = match (&self.params, self.kind) {
            (Params::NaiveBayes { log_priors, log_likelihood, .. }, ModelKind::Nb) => {
                if log_priors.len() != k {
                    return bad("priors");
                }
                log_likelihood
            }
            (Params::Linear { weights, biases, .. }, ModelKind::Lr | ModelKind::Svm) => {
                if biases.len() != k {
                    return bad("biases");
                }
                weights
            }
            _ => return Err(Error::Validation(format!("parameters do not fit model kind {}", self.kind))),
        };
        if rows.len() != k || rows.iter().any(|r| r.len() != self.n_features) {
            return bad("parameter rows");
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    /// Loads a model and checks that it was trained against `vocab`.
    pub fn load(path: &Path, vocab: &Vocabulary) -> Result<Self> {
        let model = Self::load_unchecked(path)?;
        model.check_vocab(vocab)?;
        Ok(model)
    }

    pub fn load_unchecked(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// First index of the maximum.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
