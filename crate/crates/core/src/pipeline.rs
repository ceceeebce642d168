//! A vectorizer plus classifier, trained end to end from token documents.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{Model, ModelKind, TrainConfig};
use crate::error::{Error, Result};
use crate::textprep::{tokenize, Stopwords, TokenDoc};
use crate::vectorspace::{encode, encode_corpus, Scheme, SparseVector, VectorizerConfig, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub vectorizer: VectorizerConfig,
    pub classifier: ModelKind,
    pub train: TrainConfig,
}

impl PipelineSpec {
    pub fn new(scheme: Scheme, classifier: ModelKind) -> Self {
        PipelineSpec {
            vectorizer: VectorizerConfig::new(scheme),
            classifier,
            train: TrainConfig::default(),
        }
    }

    /// The six vectorizer × classifier combinations, BOW first, then NB, LR, SVM.
    pub fn all(vectorizer: VectorizerConfig, train: TrainConfig) -> Vec<PipelineSpec> {
        [Scheme::Bow, Scheme::Tfidf]
            .into_iter()
            .flat_map(|scheme| {
                ModelKind::ALL.into_iter().map(move |classifier| PipelineSpec {
                    vectorizer: VectorizerConfig { scheme, ..vectorizer },
                    classifier,
                    train,
                })
            })
            .collect()
    }

    pub fn scheme(&self) -> Scheme {
        self.vectorizer.scheme
    }
}

/// `BOW-NB`, `TFIDF-SVM`, ...
impl fmt::Display for PipelineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}",
            self.scheme().to_string().to_uppercase(),
            self.classifier.to_string().to_uppercase()
        )
    }
}

impl FromStr for PipelineSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (v, c) = s
            .split_once(['-', '+', '/'])
            .ok_or_else(|| Error::InvalidArgument(format!("pipeline {s:?} is not of the form VECTORIZER-CLASSIFIER")))?;
        Ok(PipelineSpec::new(v.parse()?, c.parse()?))
    }
}

#[derive(Debug, Clone)]
pub struct TrainedPipeline {
    pub vocab: Vocabulary,
    pub model: Model,
    pub stopwords: Stopwords,
}

impl TrainedPipeline {
    /// Fits the vocabulary on `docs`, encodes them and trains the classifier.
    pub fn fit<S: AsRef<str>>(spec: &PipelineSpec, docs: &[TokenDoc], labels: &[S]) -> Result<Self> {
        let vocab = Vocabulary::fit(docs, spec.vectorizer)?;
        let matrix = encode_corpus(docs, &vocab, spec.scheme());
        let model = Model::train(spec.classifier, &matrix, labels, &spec.train)?;
        Ok(TrainedPipeline {
            vocab,
            model,
            stopwords: Stopwords::bundled(),
        })
    }

    pub fn spec(&self) -> PipelineSpec {
        PipelineSpec {
            vectorizer: *self.vocab.config(),
            classifier: self.model.kind,
            train: self.model.train_config,
        }
    }

    pub fn encode_tokens(&self, doc: &TokenDoc) -> SparseVector {
        encode(doc, &self.vocab, self.vocab.scheme())
    }

    pub fn classify_tokens(&self, doc: &TokenDoc) -> Result<&str> {
        self.model.predict(&self.encode_tokens(doc))
    }

    /// Preprocess, encode and predict one raw text.
    pub fn classify_text(&self, text: &str) -> Result<&str> {
        let doc = TokenDoc::new("", tokenize(text, &self.stopwords));
        self.classify_tokens(&doc)
    }

    /// `model.json` → `model.vocab.json`.
    pub fn vocab_path(model_path: &Path) -> PathBuf {
        let stem = model_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        model_path.with_file_name(format!("{stem}.vocab.json"))
    }

    /// Writes the model to `path` and the vocabulary next to it.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.model.save(path)?;
        self.vocab.save(&Self::vocab_path(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let vocab = Vocabulary::load(&Self::vocab_path(path))?;
        let model = Model::load(path, &vocab)?;
        Ok(TrainedPipeline {
            vocab,
            model,
            stopwords: Stopwords::bundled(),
        })
    }
}
