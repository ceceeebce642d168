use std::fs;
use std::io::{self, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use spamtax_core::classifiers::{ClassWeightMode, ModelKind, TrainConfig};
use spamtax_core::corpus::{self, load_dataset, save_dataset, BodyMode, DatasetManifest, Document};
use spamtax_core::evalkit::{bench, cross_validate, write_table_csv, EvalReport};
use spamtax_core::pipeline::{PipelineSpec, TrainedPipeline};
use spamtax_core::textprep::{filter_min_words, preprocess_all, Stopwords, TokenDoc, DEFAULT_MIN_WORDS};
use spamtax_core::vectorspace::{encode_corpus, Scheme, VectorizerConfig, Vocabulary};
use spamtax_core::wardcluster::{summarize, ward_cluster};
use spamtax_review::{ReviewSession, DEFAULT_ADDR};

use crate::config::{pick, Config};
use crate::*;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_MIN_CONFIDENCE: f64 = 0.5;
const DEFAULT_K: usize = 20;
const DEFAULT_CV: usize = 5;
const DEFAULT_BENCH_REPS: usize = 3;

struct Ctx {
    config: Config,
    seed: u64,
}

pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let seed = pick(cli.seed, config.seed, DEFAULT_SEED);
    let ctx = Ctx { config, seed };
    match cli.command {
        Command::Ingest(a) => ingest(&ctx, a),
        Command::Prep(a) => prep(&ctx, a),
        Command::Cluster(a) => cluster(&ctx, a),
        Command::Review(a) => review(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
        Command::Bench(a) => bench_model(&ctx, a),
        Command::Classify(a) => classify(&ctx, a),
    }
}

impl Ctx {
    fn stopwords(&self, flag: Option<PathBuf>) -> Result<Stopwords> {
        match flag.or_else(|| self.config.stopwords.clone()) {
            Some(path) => Stopwords::load(&path).with_context(|| format!("loading stopwords {}", path.display())),
            None => Ok(Stopwords::bundled()),
        }
    }

    fn vectorizer(&self, scheme: Scheme, a: &VectorizerArgs) -> Result<VectorizerConfig> {
        let d = VectorizerConfig::new(scheme);
        let v = VectorizerConfig {
            min_df: pick(a.min_df, self.config.min_df, d.min_df),
            max_features: pick(a.max_features, self.config.max_features, d.max_features),
            ..d
        };
        v.validate()?;
        Ok(v)
    }

    fn train_config(&self, a: &SolverArgs) -> Result<TrainConfig> {
        let d = TrainConfig::default();
        let class_weight = match a.class_weight.as_deref().or(self.config.class_weight.as_deref()) {
            None | Some("balanced") => ClassWeightMode::Balanced,
            Some("none") => ClassWeightMode::None,
            Some(other) => bail!("unknown class weight mode {other:?}; expected `balanced` or `none`"),
        };
        let t = TrainConfig {
            c: pick(a.c, self.config.c, d.c),
            alpha: pick(a.alpha, self.config.alpha, d.alpha),
            class_weight,
            max_iter: pick(a.max_iter, self.config.max_iter, d.max_iter),
            tol: pick(a.tol, self.config.tol, d.tol),
            seed: self.seed,
        };
        t.validate()?;
        Ok(t)
    }
}

fn load(path: &Path) -> Result<(Vec<Document>, DatasetManifest)> {
    load_dataset(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn ingest(ctx: &Ctx, a: IngestArgs) -> Result<()> {
    let mode = if a.mime { BodyMode::Mime } else { BodyMode::Plain };
    let min_confidence = pick(a.min_confidence, ctx.config.min_confidence, DEFAULT_MIN_CONFIDENCE);
    ensure!((0.0..=1.0).contains(&min_confidence), "--min-confidence must be in [0, 1]");
    let (raw, report) = corpus::ingest(&a.inputs, mode)?;
    for issue in &report.issues {
        log::warn!("{}: {}", issue.source, issue.message);
    }
    let docs = corpus::to_documents(raw);
    let read = docs.len();
    let docs = if a.all_languages { docs } else { corpus::filter_english(docs, min_confidence) };
    let manifest = DatasetManifest::from_documents(&docs)?;
    save_dataset(&docs, &manifest, &a.out)?;
    eprintln!(
        "ingest: read {read} emails, kept {} ({} skipped inputs) -> {}",
        docs.len(),
        report.issues.len(),
        a.out.display()
    );
    Ok(())
}

fn prep(ctx: &Ctx, a: PrepArgs) -> Result<()> {
    let (docs, _) = load(&a.dataset)?;
    let stopwords = ctx.stopwords(a.vectorizer.stopwords.clone())?;
    let min_words = pick(a.min_words, ctx.config.min_words, DEFAULT_MIN_WORDS);
    let tokens = filter_min_words(preprocess_all(&docs, &stopwords), min_words);
    let kept_ids: std::collections::HashSet<&str> = tokens.iter().map(|t| t.id.as_str()).collect();
    let kept: Vec<Document> = docs.iter().filter(|d| kept_ids.contains(d.id.as_str())).cloned().collect();
    let vocab = Vocabulary::fit(&tokens, ctx.vectorizer(Scheme::Tfidf, &a.vectorizer)?)?;

    create_dir(&a.out)?;
    let docs_path = a.out.join("docs.jsonl");
    save_dataset(&kept, &DatasetManifest::from_documents(&kept)?, &docs_path)?;
    vocab.save(&a.out.join("vocab.json"))?;
    eprintln!(
        "prep: kept {} of {} documents with at least {min_words} tokens; vocabulary of {} terms -> {}",
        kept.len(),
        docs.len(),
        vocab.len(),
        a.out.display()
    );
    Ok(())
}

fn cluster(ctx: &Ctx, a: ClusterArgs) -> Result<()> {
    let k = pick(a.k, ctx.config.k, DEFAULT_K);
    let session_path = a.out.join("session.json");
    if session_path.exists() && !a.force {
        bail!("{} exists; pass --force to replace it and its labels", session_path.display());
    }
    let (docs, _) = load(&a.dataset)?;
    let vocab = Vocabulary::load(&a.vocab).with_context(|| format!("loading vocabulary {}", a.vocab.display()))?;
    let tokens = preprocess_all(&docs, &Stopwords::bundled());
    let matrix = encode_corpus(&tokens, &vocab, vocab.scheme());
    let dendrogram = ward_cluster(&matrix)?;
    let cut = dendrogram.cut(k)?;

    create_dir(&a.out)?;
    dendrogram.save(&a.out.join("dendrogram.json"))?;
    let absolute = |p: &Path| fs::canonicalize(p).with_context(|| format!("resolving {}", p.display()));
    let session = ReviewSession::new(
        absolute(&a.dataset)?,
        "dendrogram.json".into(),
        absolute(&a.vocab)?,
        "labeled.jsonl".into(),
        k,
    );
    session.save(&session_path)?;

    let mut out = io::stdout().lock();
    writeln!(out, "# seed={} k={k} documents={}", ctx.seed, docs.len())?;
    for s in summarize(&cut, &matrix, &vocab, 8, 0)? {
        let terms: Vec<&str> = s.top_terms.iter().map(|(t, _)| t.as_str()).collect();
        writeln!(out, "{}\t{}\t{}", cut.nodes[s.cluster], s.size, terms.join(" "))?;
    }
    eprintln!("cluster: session written to {}", session_path.display());
    Ok(())
}

fn review(ctx: &Ctx, a: ReviewArgs) -> Result<()> {
    let addr = a.addr.or_else(|| ctx.config.addr.clone()).unwrap_or_else(|| DEFAULT_ADDR.to_owned());
    let addr: SocketAddr = addr.parse().with_context(|| format!("invalid address {addr:?}"))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(spamtax_review::serve(&a.session, addr, a.static_dir))?;
    Ok(())
}

fn labeled(path: &Path, stopwords: &Stopwords) -> Result<(Vec<Document>, Vec<TokenDoc>, Vec<String>)> {
    let (docs, manifest) = load(path)?;
    if !manifest.is_labeled() {
        bail!("dataset has no labels: {}", path.display());
    }
    let tokens = preprocess_all(&docs, stopwords);
    let labels = docs.iter().map(|d| d.label.clone().unwrap_or_default()).collect();
    Ok((docs, tokens, labels))
}

fn train(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    let scheme: Scheme = a.vectorizer.as_deref().or(ctx.config.vectorizer.as_deref()).unwrap_or("tfidf").parse()?;
    let kind: ModelKind = a.clf.as_deref().or(ctx.config.clf.as_deref()).unwrap_or("svm").parse()?;
    let spec = PipelineSpec {
        vectorizer: ctx.vectorizer(scheme, &a.vectorizer_args)?,
        classifier: kind,
        train: ctx.train_config(&a.solver)?,
    };
    let stopwords = ctx.stopwords(a.vectorizer_args.stopwords.clone())?;
    let (_, tokens, labels) = labeled(&a.dataset, &stopwords)?;
    let pipeline = TrainedPipeline::fit(&spec, &tokens, &labels)?;
    pipeline.save(&a.out)?;
    eprintln!(
        "train: {spec} seed={} on {} documents, {} categories, {} features, converged={} -> {}",
        ctx.seed,
        tokens.len(),
        pipeline.model.categories.len(),
        pipeline.vocab.len(),
        pipeline.model.converged,
        a.out.display()
    );
    Ok(())
}

fn eval(ctx: &Ctx, a: EvalArgs) -> Result<()> {
    let folds = pick(a.cv, ctx.config.cv, DEFAULT_CV);
    let reps = pick(a.bench_reps, ctx.config.bench_reps, DEFAULT_BENCH_REPS);
    let train = ctx.train_config(&a.solver)?;
    let base = ctx.vectorizer(Scheme::Tfidf, &a.vectorizer_args)?;
    let specs = if a.all {
        PipelineSpec::all(base, train)
    } else {
        a.pipeline
            .iter()
            .map(|p| {
                let parsed: PipelineSpec = p.parse()?;
                Ok(PipelineSpec {
                    vectorizer: VectorizerConfig { scheme: parsed.scheme(), ..base },
                    classifier: parsed.classifier,
                    train,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    let stopwords = ctx.stopwords(a.vectorizer_args.stopwords.clone())?;
    let (docs, tokens, labels) = labeled(&a.dataset, &stopwords)?;
    let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
    eprintln!(
        "# seed={} folds={folds} documents={} bench_reps={reps} dataset={}",
        ctx.seed,
        docs.len(),
        a.dataset.display()
    );

    let mut reports: Vec<EvalReport> = Vec::with_capacity(specs.len());
    for spec in &specs {
        let mut report = cross_validate(&tokens, &labels, spec, folds, ctx.seed).with_context(|| format!("evaluating {spec}"))?;
        if reps > 0 {
            let mut pipeline = TrainedPipeline::fit(spec, &tokens, &labels)?;
            pipeline.stopwords = stopwords.clone();
            report.ms_per_email = Some(bench(&pipeline, &texts, reps)?);
        }
        log::info!(
            "{spec}: cv accuracy {:.4} ± {:.4}, micro F1 {:.4}",
            report.cv_accuracy_mean,
            report.cv_accuracy_std,
            report.metrics.micro.f1
        );
        reports.push(report);
    }

    match &a.out {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_table_csv(&reports, io::BufWriter::new(file))?;
        }
        None => write_table_csv(&reports, io::stdout().lock())?,
    }
    if let Some(path) = &a.report {
        let json = serde_json::to_string_pretty(&reports)?;
        fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn load_pipeline(model: &Path, stopwords: Stopwords) -> Result<TrainedPipeline> {
    let mut p = TrainedPipeline::load(model).with_context(|| format!("loading model {}", model.display()))?;
    p.stopwords = stopwords;
    Ok(p)
}

fn bench_model(ctx: &Ctx, a: BenchArgs) -> Result<()> {
    let pipeline = load_pipeline(&a.model, ctx.stopwords(a.stopwords)?)?;
    let reps = pick(a.reps, ctx.config.bench_reps, DEFAULT_BENCH_REPS);
    let (docs, _) = load(&a.dataset)?;
    let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
    let ms = bench(&pipeline, &texts, reps)?;
    println!("# seed={} emails={} reps={reps}", ctx.seed, texts.len());
    println!("{}\t{ms:.4} ms/email", pipeline.spec());
    Ok(())
}

fn classify(ctx: &Ctx, a: ClassifyArgs) -> Result<()> {
    let pipeline = load_pipeline(&a.model, ctx.stopwords(a.stopwords)?)?;
    let body = |raw: Vec<u8>| -> String {
        if a.mime {
            if let Some(text) = corpus::mime::extract_body(&raw) {
                return text;
            }
        }
        String::from_utf8_lossy(&raw).into_owned()
    };
    let mut out = io::stdout().lock();
    if a.files.is_empty() {
        let mut raw = Vec::new();
        io::stdin().read_to_end(&mut raw).context("reading stdin")?;
        writeln!(out, "stdin\t{}", pipeline.classify_text(&body(raw))?)?;
    }
    for path in &a.files {
        let raw = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        writeln!(out, "{}\t{}", path.display(), pipeline.classify_text(&body(raw))?)?;
    }
    Ok(())
}
