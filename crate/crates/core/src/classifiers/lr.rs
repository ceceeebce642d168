use rayon::prelude::*;

use super::lbfgs;
use super::{Encoded, Model, ModelKind, Params, TrainConfig, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::vectorspace::{CorpusMatrix, SparseVector};

/// Binary objective `0.5 |w|^2 + C * sum_i k_i * ln(1 + exp(-y_i (w.x_i + b)))`
/// over the parameter vector `[w_0, .., w_{d-1}, b]`. The bias is not
/// regularized.
pub struct LogisticObjective<'a> {
    rows: &'a [SparseVector],
    signs: &'a [f64],
    weights: &'a [f64],
    c: f64,
    dim: usize,
}

/// `ln(1 + exp(-z))` without overflow.
fn softplus_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// `1 / (1 + exp(z))`
fn sigmoid_neg(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

impl<'a> LogisticObjective<'a> {
    /// `signs` are +1 / -1 targets, `weights` the per-sample multipliers.
    pub fn new(rows: &'a [SparseVector], signs: &'a [f64], weights: &'a [f64], c: f64, dim: usize) -> Self {
        LogisticObjective { rows, signs, weights, c, dim }
    }

    pub fn n_params(&self) -> usize {
        self.dim + 1
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let mut grad = vec![0.0; params.len()];
        self.value_grad(params, &mut grad)
    }

    pub fn value_grad(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let (w, b) = (&params[..self.dim], params[self.dim]);
        let mut value = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        grad[..self.dim].copy_from_slice(w);
        grad[self.dim] = 0.0;
        for ((x, &y), &k) in self.rows.iter().zip(self.signs).zip(self.weights) {
            let z = y * (x.dot_dense(w) + b);
            value += self.c * k * softplus_neg(z);
            let coef = -self.c * k * y * sigmoid_neg(z);
            for &(j, v) in &x.entries {
                grad[j] += coef * v;
            }
            grad[self.dim] += coef;
        }
        value
    }
}

/// One-vs-rest logistic regression fitted with L-BFGS.
pub fn train_lr<S: AsRef<str>>(matrix: &CorpusMatrix, labels: &[S], config: &TrainConfig) -> Result<Model> {
    config.validate()?;
    let data = Encoded::new(matrix, labels)?;
    let kappa = data.sample_weights(config.class_weight);
    let dim = data.dim;

    let fits: Vec<Result<lbfgs::Outcome>> = (0..data.categories.len())
        .into_par_iter()
        .map(|c| {
            let signs: Vec<f64> = data.y.iter().map(|&y| if y == c { 1.0 } else { -1.0 }).collect();
            let obj = LogisticObjective::new(data.rows, &signs, &kappa, config.c, dim);
            lbfgs::minimize(|p, g| obj.value_grad(p, g), vec![0.0; dim + 1], config.max_iter, config.tol).ok_or_else(
                || Error::NonFiniteLoss {
                    category: data.categories[c].clone(),
                },
            )
        })
        .collect();

    let mut weights = Vec::with_capacity(fits.len());
    let mut biases = Vec::with_capacity(fits.len());
    let mut iterations = Vec::with_capacity(fits.len());
    let mut converged = true;
    for (fit, category) in fits.into_iter().zip(&data.categories) {
        let mut fit = fit?;
        if !fit.converged {
            log::warn!("logistic regression for {category:?} stopped after {} iterations without converging", fit.iterations);
        }
        converged &= fit.converged;
        iterations.push(fit.iterations);
        biases.push(fit.x.pop().unwrap());
        weights.push(fit.x);
    }

    Ok(Model {
        format_version: FORMAT_VERSION,
        kind: ModelKind::Lr,
        categories: data.categories,
        vocab_hash: matrix.vocab_hash.clone(),
        n_features: dim,
        params: Params::Linear { weights, biases, c: config.c },
        train_config: *config,
        converged,
        iterations,
    })
}
