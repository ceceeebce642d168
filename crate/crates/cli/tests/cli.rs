use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use spamtax_core::corpus::{load_dataset, save_dataset, DatasetManifest, Document};
use spamtax_review::ReviewSession;
use tempfile::TempDir;

const POOLS: [(&str, &[&str]); 3] = [
    ("pharma", &["pharmacy", "pills", "prescription", "cheap", "medication", "doctor", "dosage", "tablets"]),
    ("lottery", &["lottery", "winner", "prize", "claim", "million", "bank", "transfer", "beneficiary"]),
    ("stocks", &["stock", "shares", "invest", "market", "profit", "trading", "broker", "portfolio"]),
];

fn spamtax(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spamtax"))
        .current_dir(dir)
        .args(args)
        .env_remove("SPAMTAX_ADDR")
        .output()
        .unwrap()
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn body(i: usize) -> String {
    let (_, words) = POOLS[i % 3];
    let picked: Vec<&str> = (0..14).map(|j| words[(i * 5 + j * 3) % words.len()]).collect();
    format!("Dear friend, we have {} for you and the offer is here.", picked.join(" "))
}

/// Labeled dataset with 20 documents per pool.
fn labeled_dataset(dir: &Path) -> PathBuf {
    let docs: Vec<Document> = (0..60)
        .map(|i| Document {
            label: Some(POOLS[i % 3].0.to_owned()),
            ..Document::detect(format!("d{i:02}"), body(i))
        })
        .collect();
    let path = dir.join("labeled.jsonl");
    save_dataset(&docs, &DatasetManifest::from_documents(&docs).unwrap(), &path).unwrap();
    path
}

fn write_emails(dir: &Path) -> PathBuf {
    let mail = dir.join("mail");
    std::fs::create_dir(&mail).unwrap();
    for i in 0..30 {
        std::fs::write(mail.join(format!("{i:02}.txt")), body(i)).unwrap();
    }
    mail
}

#[test]
fn ingest_prep_cluster_produce_a_consistent_session() {
    let dir = TempDir::new().unwrap();
    write_emails(dir.path());
    ok(spamtax(dir.path(), &["ingest", "mail", "--out", "raw.jsonl", "--all-languages"]));
    let (docs, manifest) = load_dataset(&dir.path().join("raw.jsonl")).unwrap();
    assert_eq!((docs.len(), manifest.total), (30, 30));

    ok(spamtax(dir.path(), &["prep", "--dataset", "raw.jsonl", "--out", "prep", "--min-df", "1"]));
    let stdout = ok(spamtax(
        dir.path(),
        &["cluster", "--dataset", "prep/docs.jsonl", "--vocab", "prep/vocab.json", "--k", "3", "--out", "tax"],
    ));
    let mut lines = stdout.lines();
    assert!(lines.next().unwrap().contains("seed=42"));
    let sizes: usize = lines.map(|l| l.split('\t').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(sizes, 30);

    let session_path = dir.path().join("tax/session.json");
    let session = ReviewSession::load(&session_path).unwrap();
    assert_eq!(session.k, 3);
    spamtax_review::AppState::open(&session_path).unwrap();

    // an existing session is not silently replaced
    let again = spamtax(
        dir.path(),
        &["cluster", "--dataset", "prep/docs.jsonl", "--vocab", "prep/vocab.json", "--out", "tax"],
    );
    assert!(!again.status.success());
}

#[test]
fn train_then_classify() {
    let dir = TempDir::new().unwrap();
    labeled_dataset(dir.path());
    ok(spamtax(
        dir.path(),
        &["train", "--dataset", "labeled.jsonl", "--vectorizer", "tfidf", "--clf", "svm", "--out", "m.json", "--min-df", "1"],
    ));
    assert!(dir.path().join("m.vocab.json").exists());

    let mut child = Command::new(env!("CARGO_BIN_EXE_spamtax"))
        .current_dir(dir.path())
        .args(["classify", "--model", "m.json"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"Claim your lottery prize now, the bank transfer for the winner is ready")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "stdin\tlottery\n");

    std::fs::write(dir.path().join("a.txt"), "cheap pills from the pharmacy without prescription").unwrap();
    std::fs::write(dir.path().join("b.txt"), "invest in this stock before the market opens").unwrap();
    let stdout = ok(spamtax(dir.path(), &["classify", "--model", "m.json", "a.txt", "b.txt"]));
    assert_eq!(stdout, "a.txt\tpharma\nb.txt\tstocks\n");
}

#[test]
fn train_refuses_unlabeled_data() {
    let dir = TempDir::new().unwrap();
    let docs: Vec<Document> = (0..10).map(|i| Document::detect(i.to_string(), body(i))).collect();
    save_dataset(&docs, &DatasetManifest::from_documents(&docs).unwrap(), &dir.path().join("u.jsonl")).unwrap();
    let out = spamtax(dir.path(), &["train", "--vectorizer", "tfidf", "--clf", "svm", "--dataset", "u.jsonl", "--out", "m.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dataset has no labels"));
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn eval_all_writes_six_rows_and_reports() {
    let dir = TempDir::new().unwrap();
    labeled_dataset(dir.path());
    let out = spamtax(
        dir.path(),
        &[
            "eval", "--all", "--dataset", "labeled.jsonl", "--cv", "5", "--seed", "42", "--min-df", "1", "--bench-reps", "1",
            "--out", "table.csv", "--report", "report.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed=42"));

    let mut reader = csv::Reader::from_path(dir.path().join("table.csv")).unwrap();
    assert_eq!(reader.headers().unwrap().len(), 13);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let names: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(names, ["BOW-NB", "BOW-LR", "BOW-SVM", "TFIDF-NB", "TFIDF-LR", "TFIDF-SVM"]);
    for r in &rows {
        let accuracy: f64 = r[10].parse().unwrap();
        assert!(accuracy > 0.9, "{r:?}");
        assert!(r[12].parse::<f64>().unwrap() > 0.0);
    }
    let reports: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 6);
    assert_eq!(reports[0]["seed"], 42);
}

#[test]
fn eval_is_reproducible_and_config_supplies_flags() {
    let dir = TempDir::new().unwrap();
    labeled_dataset(dir.path());
    std::fs::write(dir.path().join("cfg.toml"), "seed = 9\ncv = 3\nmin_df = 1\nbench_reps = 0\n").unwrap();
    let run = || ok(spamtax(dir.path(), &["eval", "--config", "cfg.toml", "--pipeline", "bow-lr", "--dataset", "labeled.jsonl"]));
    let first = run();
    assert_eq!(first, run());
    assert_eq!(first.lines().count(), 2);
    // no bench: empty latency column
    assert!(first.lines().nth(1).unwrap().ends_with(','));

    let out = spamtax(dir.path(), &["eval", "--config", "cfg.toml", "--pipeline", "bow-lr", "--dataset", "labeled.jsonl"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed=9 folds=3"));
    let out = spamtax(
        dir.path(),
        &["eval", "--config", "cfg.toml", "--seed", "5", "--cv", "4", "--pipeline", "bow-lr", "--dataset", "labeled.jsonl"],
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed=5 folds=4"));
}

#[test]
fn bench_prints_latency() {
    let dir = TempDir::new().unwrap();
    labeled_dataset(dir.path());
    ok(spamtax(dir.path(), &["train", "--dataset", "labeled.jsonl", "--clf", "nb", "--vectorizer", "bow", "--out", "nb.json"]));
    let stdout = ok(spamtax(dir.path(), &["bench", "--model", "nb.json", "--dataset", "labeled.jsonl", "--reps", "2"]));
    let line = stdout.lines().nth(1).unwrap();
    assert!(line.starts_with("BOW-NB\t") && line.ends_with(" ms/email"), "{line}");
}

#[test]
fn bad_inputs_fail_with_a_diagnostic() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["train", "--dataset", "missing.jsonl", "--out", "m.json"][..],
        &["eval", "--dataset", "missing.jsonl"][..],
        &["classify", "--model", "missing.json"][..],
        &["eval", "--all", "--pipeline", "bow-nb", "--dataset", "x.jsonl"][..],
        &["train", "--dataset", "x.jsonl", "--out", "m.json", "--clf", "knn"][..],
    ] {
        let out = spamtax(dir.path(), args);
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    std::fs::write(dir.path().join("bad.toml"), "colour = 1\n").unwrap();
    let out = spamtax(dir.path(), &["--config", "bad.toml", "eval", "--all", "--dataset", "x.jsonl"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.toml"));
}

#[test]
fn review_rejects_a_bad_address() {
    let dir = TempDir::new().unwrap();
    let out = spamtax(dir.path(), &["review", "--session", "s.json", "--addr", "not-an-address"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid address"));
}
