use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{metrics, ConfusionMatrix, EvalReport, MachineInfo};
use crate::error::{Error, Result};
use crate::pipeline::{PipelineSpec, TrainedPipeline};
use crate::textprep::TokenDoc;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles each category's indices with a seeded generator and deals them
/// round-robin over the folds, continuing where the previous category
/// stopped so that fold sizes also stay within one of each other.
pub fn stratified_kfold<S: AsRef<str>>(labels: &[S], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    let mut by_category: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_category.entry(l.as_ref()).or_default().push(i);
    }
    if let Some((c, idx)) = by_category.iter().find(|(_, idx)| idx.len() < k) {
        return Err(Error::CategoryTooSmall {
            category: c.to_string(),
            count: idx.len(),
            k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; labels.len()];
    let mut offset = 0;
    for idx in by_category.values_mut() {
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            fold_of[i] = (offset + pos) % k;
        }
        offset = (offset + idx.len()) % k;
    }
    Ok((0..k)
        .map(|f| {
            let (test, train) = (0..labels.len()).partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect())
}

struct FoldResult {
    confusion: ConfusionMatrix,
    accuracy: f64,
}

fn run_fold<S: AsRef<str> + Sync>(
    spec: &PipelineSpec,
    docs: &[TokenDoc],
    labels: &[S],
    categories: &[String],
    fold: &Fold,
) -> Result<FoldResult> {
    let train_docs: Vec<TokenDoc> = fold.train.iter().map(|&i| docs[i].clone()).collect();
    let train_labels: Vec<&str> = fold.train.iter().map(|&i| labels[i].as_ref()).collect();
    // the vocabulary sees only the training part
    let pipeline = TrainedPipeline::fit(spec, &train_docs, &train_labels)?;
    let mut cm = ConfusionMatrix::zeros(categories.to_vec());
    for &i in &fold.test {
        cm.add(labels[i].as_ref(), pipeline.classify_tokens(&docs[i])?)?;
    }
    Ok(FoldResult {
        accuracy: cm.accuracy(),
        confusion: cm,
    })
}

/// k-fold cross-validation of one pipeline. Precision, recall and F1 come
/// from the confusion matrix pooled over all folds; the accuracy mean and
/// (population) standard deviation are over per-fold accuracies.
pub fn cross_validate<S: AsRef<str> + Sync>(
    docs: &[TokenDoc],
    labels: &[S],
    spec: &PipelineSpec,
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    if docs.len() != labels.len() {
        return Err(Error::Validation(format!(
            "{} documents but {} labels",
            docs.len(),
            labels.len()
        )));
    }
    let folds = stratified_kfold(labels, k, seed)?;
    let mut categories: Vec<String> = labels.iter().map(|l| l.as_ref().to_owned()).collect();
    categories.sort();
    categories.dedup();

    let results: Vec<Result<FoldResult>> = folds
        .par_iter()
        .map(|fold| run_fold(spec, docs, labels, &categories, fold))
        .collect();

    let mut pooled = ConfusionMatrix::zeros(categories);
    let mut accuracies = Vec::with_capacity(k);
    for (f, r) in results.into_iter().enumerate() {
        let r = r.map_err(|e| Error::Fold {
            fold: f,
            source: Box::new(e),
        })?;
        pooled.merge(&r.confusion)?;
        accuracies.push(r.accuracy);
    }
    let mean = accuracies.iter().sum::<f64>() / k as f64;
    let std = (accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / k as f64).sqrt();

    Ok(EvalReport {
        pipeline: spec.to_string(),
        spec: *spec,
        metrics: metrics(&pooled)?,
        confusion: pooled,
        folds: k,
        seed,
        fold_accuracies: accuracies,
        cv_accuracy_mean: mean,
        cv_accuracy_std: std,
        ms_per_email: None,
        machine: MachineInfo::current(),
    })
}
