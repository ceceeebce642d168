use super::{Encoded, Model, ModelKind, Params, TrainConfig, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::vectorspace::CorpusMatrix;

/// Multinomial naive Bayes with additive smoothing. Feature values act as
/// (possibly fractional) term counts. Class weights are not used.
pub fn train_nb<S: AsRef<str>>(matrix: &CorpusMatrix, labels: &[S], config: &TrainConfig) -> Result<Model> {
    config.validate()?;
    let data = Encoded::new(matrix, labels)?;
    let (k, v) = (data.categories.len(), data.dim);

    let mut feature_sums = vec![vec![0.0; v]; k];
    let mut class_counts = vec![0usize; k];
    for (row, (x, &c)) in data.rows.iter().zip(&data.y).enumerate() {
        class_counts[c] += 1;
        for &(col, value) in &x.entries {
            if value < 0.0 {
                return Err(Error::NegativeFeature { row, col, value });
            }
            feature_sums[c][col] += value;
        }
    }

    let n = data.y.len() as f64;
    let alpha = config.alpha;
    let log_priors = class_counts.iter().map(|&nc| (nc as f64 / n).ln()).collect();
    let log_likelihood = feature_sums
        .iter()
        .map(|f| {
            let denom = (f.iter().sum::<f64>() + alpha * v as f64).ln();
            f.iter().map(|&ft| (ft + alpha).ln() - denom).collect()
        })
        .collect();

    Ok(Model {
        format_version: FORMAT_VERSION,
        kind: ModelKind::Nb,
        categories: data.categories,
        vocab_hash: matrix.vocab_hash.clone(),
        n_features: v,
        params: Params::NaiveBayes {
            log_priors,
            log_likelihood,
            alpha,
        },
        train_config: *config,
        converged: true,
        iterations: Vec::new(),
    })
}
