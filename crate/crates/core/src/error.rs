use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no inputs: {0}")]
    NoInputs(String),

    #[error("{path}: line {line}: {detail}")]
    Parse {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("empty vocabulary: no term reaches min_df = {min_df}")]
    EmptyVocabulary { min_df: usize },

    #[error("need at least 2 rows to cluster, got {0}")]
    TooFewRows(usize),

    #[error("k = {k} is out of range 1..={n}")]
    InvalidK { k: usize, n: usize },

    #[error("unlabeled clusters: {0:?}")]
    UnmappedClusters(Vec<usize>),

    #[error("negative feature value {value} at row {row}, column {col}")]
    NegativeFeature { row: usize, col: usize, value: f64 },

    #[error("non-finite loss while training {category}; try scaling the features or lowering C")]
    NonFiniteLoss { category: String },

    #[error("dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vocabulary hash mismatch: model was trained with {expected}, got {got}")]
    VocabMismatch { expected: String, got: String },

    #[error("unsupported model format version {0}")]
    FormatVersion(u32),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("category {category:?} has {count} samples, fewer than k = {k}")]
    CategoryTooSmall {
        category: String,
        count: usize,
        k: usize,
    },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
