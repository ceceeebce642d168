mod common;

use common::{seeded, synthetic_corpus};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use spamtax_core::classifiers::{ModelKind, TrainConfig};
use spamtax_core::evalkit::{bench, cross_validate, metrics, write_table_csv, ConfusionMatrix, TABLE_HEADER};
use spamtax_core::pipeline::{PipelineSpec, TrainedPipeline};
use spamtax_core::textprep::{tokenize, Stopwords, TokenDoc};
use spamtax_core::vectorspace::{Scheme, VectorizerConfig};
use spamtax_core::Error;

fn token_docs(texts: &[String]) -> Vec<TokenDoc> {
    let sw = Stopwords::bundled();
    texts.iter().enumerate().map(|(i, t)| TokenDoc::new(i.to_string(), tokenize(t, &sw))).collect()
}

fn random_cm(rng: &mut rand_chacha::ChaCha8Rng) -> ConfusionMatrix {
    let k = rng.gen_range(1..=6);
    let mut cm = ConfusionMatrix::zeros((0..k).map(|i| format!("c{i}")).collect());
    for row in cm.counts.iter_mut() {
        for v in row.iter_mut() {
            *v = if rng.gen_bool(0.2) { 0 } else { rng.gen_range(0..50) };
        }
    }
    cm.counts[0][0] += 1;
    cm
}

#[test]
fn micro_and_weighted_recall_equal_accuracy() {
    let mut rng = seeded(1);
    for _ in 0..1000 {
        let m = metrics(&random_cm(&mut rng)).unwrap();
        assert!((m.micro.precision - m.accuracy).abs() < 1e-12);
        assert!((m.micro.recall - m.accuracy).abs() < 1e-12);
        assert!((m.micro.f1 - m.accuracy).abs() < 1e-12);
        assert!((m.weighted.recall - m.accuracy).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn macro_is_permutation_invariant(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let cm = random_cm(&mut rng);
        let k = cm.categories.len();
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut rng);
        let permuted = ConfusionMatrix {
            categories: perm.iter().map(|&i| cm.categories[i].clone()).collect(),
            counts: perm.iter().map(|&i| perm.iter().map(|&j| cm.counts[i][j]).collect()).collect(),
        };
        let (a, b) = (metrics(&cm).unwrap(), metrics(&permuted).unwrap());
        prop_assert!((a.macro_avg.precision - b.macro_avg.precision).abs() < 1e-12);
        prop_assert!((a.macro_avg.recall - b.macro_avg.recall).abs() < 1e-12);
        prop_assert!((a.macro_avg.f1 - b.macro_avg.f1).abs() < 1e-12);
        prop_assert_eq!(a.per_class, b.per_class);
    }

    #[test]
    fn equal_supports_make_macro_weighted(seed in any::<u64>(), k in 1usize..5, support in 1usize..30) {
        let mut rng = seeded(seed);
        let mut cm = ConfusionMatrix::zeros((0..k).map(|i| format!("c{i}")).collect());
        for row in cm.counts.iter_mut() {
            for _ in 0..support {
                row[rng.gen_range(0..k)] += 1;
            }
        }
        let m = metrics(&cm).unwrap();
        prop_assert!((m.macro_avg.precision - m.weighted.precision).abs() < 1e-12);
        prop_assert!((m.macro_avg.recall - m.weighted.recall).abs() < 1e-12);
        prop_assert!((m.macro_avg.f1 - m.weighted.f1).abs() < 1e-12);
    }

    #[test]
    fn scores_stay_in_unit_interval(seed in any::<u64>()) {
        let m = metrics(&random_cm(&mut seeded(seed))).unwrap();
        for c in m.per_class.values() {
            for v in [c.precision, c.recall, c.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn stratified_counts_differ_by_at_most_one(
        counts in proptest::collection::vec(5usize..40, 1..5),
        k in 2usize..6,
        seed in any::<u64>(),
    ) {
        let labels: Vec<String> = counts.iter().enumerate().flat_map(|(c, &n)| vec![format!("c{c}"); n]).collect();
        let folds = spamtax_core::evalkit::stratified_kfold(&labels, k, seed).unwrap();
        for (c, _) in counts.iter().enumerate() {
            let name = format!("c{c}");
            let per_fold: Vec<usize> = folds.iter().map(|f| f.test.iter().filter(|&&i| labels[i] == name).count()).collect();
            prop_assert!(per_fold.iter().max().unwrap() - per_fold.iter().min().unwrap() <= 1);
        }
        let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}

#[test]
fn separable_corpus_is_perfect_for_every_pipeline() {
    let s = synthetic_corpus(300, 4);
    let docs = token_docs(&s.texts);
    for spec in PipelineSpec::all(VectorizerConfig::default(), TrainConfig::default()) {
        let r = cross_validate(&docs, &s.labels, &spec, 5, 42).unwrap();
        assert!(r.cv_accuracy_mean > 0.99, "{spec}: {}", r.cv_accuracy_mean);
        assert_eq!(r.confusion.total(), 300);
    }
}

#[test]
fn shuffled_labels_are_at_chance() {
    let mut rng = seeded(8);
    let texts: Vec<String> = (0..300)
        .map(|_| (0..20).map(|_| format!("w{}", (b'a' + rng.gen_range(0..26u8)) as char)).collect::<Vec<_>>().join(" "))
        .collect();
    let labels: Vec<&str> = (0..300).map(|i| ["a", "b", "c"][i % 3]).collect();
    let docs = token_docs(&texts);
    let spec = PipelineSpec::new(Scheme::Tfidf, ModelKind::Nb);
    let r = cross_validate(&docs, &labels, &spec, 5, 42).unwrap();
    assert!((r.cv_accuracy_mean - 1.0 / 3.0).abs() < 0.1, "{}", r.cv_accuracy_mean);
}

#[test]
fn two_folds_on_four_documents() {
    let texts: Vec<String> = ["aa bb", "aa cc", "dd ee", "dd ff"].iter().map(|s| s.to_string()).collect();
    let mut spec = PipelineSpec::new(Scheme::Bow, ModelKind::Lr);
    spec.vectorizer.min_df = 1;
    let r = cross_validate(&token_docs(&texts), &["x", "x", "y", "y"], &spec, 2, 42).unwrap();
    assert_eq!(r.fold_accuracies.len(), 2);
    assert_eq!(r.confusion.total(), 4);
}

#[test]
fn fold_errors_carry_the_fold_index() {
    let texts: Vec<String> = ["aa", "bb", "cc", "dd"].iter().map(|s| s.to_string()).collect();
    let spec = PipelineSpec::new(Scheme::Bow, ModelKind::Nb); // min_df 3 cannot be met
    match cross_validate(&token_docs(&texts), &["x", "x", "y", "y"], &spec, 2, 42) {
        Err(Error::Fold { fold: 0, source }) => assert!(matches!(*source, Error::EmptyVocabulary { .. })),
        other => panic!("{other:?}"),
    }
}

#[test]
fn bench_contract() {
    let s = synthetic_corpus(120, 2);
    let docs = token_docs(&s.texts);
    let p = TrainedPipeline::fit(&PipelineSpec::new(Scheme::Tfidf, ModelKind::Nb), &docs, &s.labels).unwrap();
    assert!(bench(&p, &Vec::<String>::new(), 1).is_err());
    let one = bench(&p, &s.texts, 20).unwrap();
    let two = bench(&p, &s.texts, 40).unwrap();
    assert!(one > 0.0 && two > 0.0);
    assert!((one - two).abs() / one.max(two) < 0.5, "{one} vs {two}");
}

#[test]
fn csv_has_one_row_per_report() {
    let s = synthetic_corpus(100, 3);
    let docs = token_docs(&s.texts);
    let reports: Vec<_> = PipelineSpec::all(VectorizerConfig::default(), TrainConfig::default())
        .iter()
        .map(|spec| cross_validate(&docs, &s.labels, spec, 3, 7).unwrap())
        .collect();
    let mut out = Vec::new();
    write_table_csv(&reports, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], TABLE_HEADER.join(","));
    assert!(lines[1].starts_with("BOW-NB,"));
    assert!(lines[6].starts_with("TFIDF-SVM,"));
}
