mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "spamtax", version, about = "Spam taxonomy construction and classifier evaluation")]
pub struct Cli {
    /// TOML file with defaults for any flag; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seed for fold assignment and solvers [default: 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read email files or directories into a JSONL dataset of English documents.
    Ingest(IngestArgs),
    /// Drop short documents and fit the clustering vocabulary.
    Prep(PrepArgs),
    /// Build the Ward dendrogram and a review session.
    Cluster(ClusterArgs),
    /// Serve the labeling API (and optionally a UI bundle).
    Review(ReviewArgs),
    /// Train one pipeline on a labeled dataset.
    Train(TrainArgs),
    /// Cross-validate one or all six pipelines.
    Eval(EvalArgs),
    /// Measure per-email inference latency of a trained model.
    Bench(BenchArgs),
    /// Print `id<TAB>category` for each email on stdin or in the given files.
    Classify(ClassifyArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Files, directories (searched recursively) or one JSONL file.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Parse files as RFC 822 messages and keep the text body.
    #[arg(long)]
    pub mime: bool,
    /// Minimum language-detection confidence [default: 0.5].
    #[arg(long)]
    pub min_confidence: Option<f64>,
    /// Keep documents in every language.
    #[arg(long)]
    pub all_languages: bool,
}

#[derive(Debug, Args, Default)]
pub struct VectorizerArgs {
    /// Minimum document frequency of a term [default: 3].
    #[arg(long)]
    pub min_df: Option<usize>,
    /// Vocabulary size cap [default: 9000].
    #[arg(long)]
    pub max_features: Option<usize>,
    /// Stopword list, one term per line [default: bundled English list].
    #[arg(long, value_name = "FILE")]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SolverArgs {
    /// Inverse regularization strength for LR and SVM [default: 1000].
    #[arg(long = "C", alias = "c")]
    pub c: Option<f64>,
    /// Laplace smoothing for NB [default: 1.0].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// `balanced` or `none` [default: balanced].
    #[arg(long)]
    pub class_weight: Option<String>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Output directory for `docs.jsonl` and `vocab.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Documents with fewer tokens are dropped [default: 5].
    #[arg(long)]
    pub min_words: Option<usize>,
    #[command(flatten)]
    pub vectorizer: VectorizerArgs,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Dataset written by `prep`.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Vocabulary written by `prep`.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Initial number of clusters shown for review [default: 20].
    #[arg(long)]
    pub k: Option<usize>,
    /// Output directory for `dendrogram.json` and `session.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Replace an existing session.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ReviewArgs {
    #[arg(long)]
    pub session: PathBuf,
    /// Listen address [default: 127.0.0.1:8787].
    #[arg(long, env = "SPAMTAX_ADDR")]
    pub addr: Option<String>,
    /// Directory with a built UI bundle, served at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// `bow` or `tfidf` [default: tfidf].
    #[arg(long)]
    pub vectorizer: Option<String>,
    /// `nb`, `lr` or `svm` [default: svm].
    #[arg(long)]
    pub clf: Option<String>,
    /// Model path; the vocabulary is written next to it as `<stem>.vocab.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub vectorizer_args: VectorizerArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Evaluate all six pipelines.
    #[arg(long, conflicts_with = "pipeline")]
    pub all: bool,
    /// Pipeline such as `tfidf-svm`; repeatable.
    #[arg(long, required_unless_present = "all")]
    pub pipeline: Vec<String>,
    /// Number of folds [default: 5].
    #[arg(long)]
    pub cv: Option<usize>,
    /// CSV table path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full JSON reports.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Latency repetitions over the dataset; 0 skips timing [default: 3].
    #[arg(long)]
    pub bench_reps: Option<usize>,
    #[command(flatten)]
    pub vectorizer_args: VectorizerArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Emails to classify; labels are ignored.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Passes over the dataset [default: 3].
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Email files; reads one email from stdin when empty.
    pub files: Vec<PathBuf>,
    /// Parse input as RFC 822 messages.
    #[arg(long)]
    pub mime: bool,
    #[arg(long, value_name = "FILE")]
    pub stopwords: Option<PathBuf>,
}

fn main() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
