//! Linear soft-margin SVM trained in the dual by sequential minimal
//! optimization with second-order working set selection. Kernel columns are
//! dot products computed through an inverted index and kept in a small LRU
//! cache; the primal weights are recovered after training.

use std::collections::HashMap;
use std::rc::Rc;

use rayon::prelude::*;

use super::{Encoded, Model, ModelKind, Params, TrainConfig, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::vectorspace::{CorpusMatrix, SparseVector};

/// KKT violation below which the dual is considered solved.
const KKT_EPS: f64 = 1e-3;
const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 128 << 20;

/// Primal objective `0.5 |w|^2 + C * sum_i k_i * max(0, 1 - y_i (w.x_i + b))`.
pub fn hinge_objective(rows: &[SparseVector], signs: &[f64], weights: &[f64], c: f64, w: &[f64], b: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = rows
        .iter()
        .zip(signs)
        .zip(weights)
        .map(|((x, &y), &k)| k * (1.0 - y * (x.dot_dense(w) + b)).max(0.0))
        .sum();
    reg + c * loss
}

/// Row-by-term postings for fast `x_i . x_t` columns.
struct Gram<'a> {
    rows: &'a [SparseVector],
    postings: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
}

impl<'a> Gram<'a> {
    fn new(rows: &'a [SparseVector], dim: usize) -> Self {
        let mut postings = vec![Vec::new(); dim];
        for (r, x) in rows.iter().enumerate() {
            for &(t, v) in &x.entries {
                postings[t].push((r, v));
            }
        }
        let diag = rows.iter().map(|x| x.entries.iter().map(|(_, v)| v * v).sum()).collect();
        Gram { rows, postings, diag }
    }

    fn column(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.rows.len()];
        for &(t, v) in &self.rows[i].entries {
            for &(r, u) in &self.postings[t] {
                out[r] += v * u;
            }
        }
        out
    }
}

struct ColumnCache<'g, 'a> {
    gram: &'g Gram<'a>,
    columns: HashMap<usize, (Rc<Vec<f64>>, u64)>,
    capacity: usize,
    clock: u64,
}

impl<'g, 'a> ColumnCache<'g, 'a> {
    fn new(gram: &'g Gram<'a>) -> Self {
        let n = gram.rows.len().max(1);
        ColumnCache {
            gram,
            columns: HashMap::new(),
            capacity: (CACHE_BYTES / (8 * n)).max(2),
            clock: 0,
        }
    }

    fn get(&mut self, i: usize) -> Rc<Vec<f64>> {
        self.clock += 1;
        if let Some(entry) = self.columns.get_mut(&i) {
            entry.1 = self.clock;
            return Rc::clone(&entry.0);
        }
        if self.columns.len() >= self.capacity {
            let oldest = *self.columns.iter().min_by_key(|(_, (_, t))| *t).unwrap().0;
            self.columns.remove(&oldest);
        }
        let col = Rc::new(self.gram.column(i));
        self.columns.insert(i, (Rc::clone(&col), self.clock));
        col
    }
}

struct DualSolution {
    alpha: Vec<f64>,
    bias: f64,
    iterations: usize,
    converged: bool,
}

/// Solves `min 0.5 a'Qa - e'a` s.t. `y'a = 0`, `0 <= a_i <= upper_i`.
fn solve_dual(gram: &Gram, y: &[f64], upper: &[f64], tol: f64, max_epochs: usize) -> DualSolution {
    let n = y.len();
    let mut cache = ColumnCache::new(gram);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let at_upper = |a: &[f64], t: usize| a[t] >= upper[t];
    let at_lower = |a: &[f64], t: usize| a[t] <= 0.0;

    let mut iterations = 0;
    let mut epochs = 0;
    let mut last_objective: Option<f64> = None;
    let converged = loop {
        if iterations > 0 && iterations % n == 0 {
            let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
            if let Some(prev) = last_objective {
                let scale = objective.abs().max(prev.abs()).max(f64::MIN_POSITIVE);
                if (objective - prev).abs() <= tol * scale {
                    break true;
                }
            }
            last_objective = Some(objective);
            epochs += 1;
            if epochs >= max_epochs {
                break false;
            }
        }

        // first index: maximal violation among the "up" set
        let mut g_max = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let v = if y[t] > 0.0 {
                (!at_upper(&alpha, t)).then(|| -grad[t])
            } else {
                (!at_lower(&alpha, t)).then_some(grad[t])
            };
            if let Some(v) = v {
                if v >= g_max {
                    g_max = v;
                    i = t;
                }
            }
        }
        if i == usize::MAX {
            break true;
        }
        let k_i = cache.get(i);

        // second index: largest second-order decrease among the "low" set
        let mut g_max2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let v = if y[t] > 0.0 {
                (!at_lower(&alpha, t)).then_some(grad[t])
            } else {
                (!at_upper(&alpha, t)).then(|| -grad[t])
            };
            let Some(v) = v else { continue };
            g_max2 = g_max2.max(v);
            let diff = g_max + v;
            if diff > 0.0 {
                let mut quad = gram.diag[i] + gram.diag[t] - 2.0 * k_i[t];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let gain = -diff * diff / quad;
                if gain <= best {
                    best = gain;
                    j = t;
                }
            }
        }
        if g_max + g_max2 < KKT_EPS || j == usize::MAX {
            break true;
        }
        let k_j = cache.get(j);

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (c_i, c_j) = (upper[i], upper[j]);
        let mut quad = gram.diag[i] + gram.diag[j] - 2.0 * k_i[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > c_i - c_j {
                if alpha[i] > c_i {
                    alpha[i] = c_i;
                    alpha[j] = c_i - diff;
                }
            } else if alpha[j] > c_j {
                alpha[j] = c_j;
                alpha[i] = c_j + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c_i {
                if alpha[i] > c_i {
                    alpha[i] = c_i;
                    alpha[j] = sum - c_i;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c_j {
                if alpha[j] > c_j {
                    alpha[j] = c_j;
                    alpha[i] = sum - c_j;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (d_i, d_j) = ((alpha[i] - old_i) * y[i], (alpha[j] - old_j) * y[j]);
        for t in 0..n {
            grad[t] += y[t] * (k_i[t] * d_i + k_j[t] * d_j);
        }
        iterations += 1;
    };

    // bias from free vectors, or the midpoint of the feasible interval
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let (mut free_sum, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let upper_side = if at_upper(&alpha, t) {
            Some(y[t] < 0.0)
        } else if at_lower(&alpha, t) {
            Some(y[t] > 0.0)
        } else {
            None
        };
        match upper_side {
            Some(true) => hi = hi.min(yg),
            Some(false) => lo = lo.max(yg),
            None => {
                free_sum += yg;
                n_free += 1;
            }
        }
    }
    let rho = if n_free > 0 {
        free_sum / n_free as f64
    } else {
        (hi + lo) / 2.0
    };

    DualSolution {
        alpha,
        bias: -rho,
        iterations,
        converged,
    }
}

/// One-vs-rest linear SVM. `max_iter` bounds the number of epochs, where an
/// epoch is as many pair updates as there are samples.
pub fn train_svm<S: AsRef<str>>(matrix: &CorpusMatrix, labels: &[S], config: &TrainConfig) -> Result<Model> {
    config.validate()?;
    let data = Encoded::new(matrix, labels)?;
    let kappa = data.sample_weights(config.class_weight);
    let upper: Vec<f64> = kappa.iter().map(|k| config.c * k).collect();
    let dim = data.dim;
    let gram = Gram::new(data.rows, dim);
    if gram.diag.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFiniteLoss {
            category: data.categories[0].clone(),
        });
    }

    let fits: Vec<(Vec<f64>, f64, usize, bool)> = (0..data.categories.len())
        .into_par_iter()
        .map(|c| {
            let y: Vec<f64> = data.y.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            let sol = if y.iter().all(|&v| v > 0.0) {
                // nothing to separate
                DualSolution { alpha: vec![0.0; y.len()], bias: 1.0, iterations: 0, converged: true }
            } else {
                solve_dual(&gram, &y, &upper, config.tol, config.max_iter)
            };
            let mut w = vec![0.0; dim];
            for ((x, &a), &yi) in data.rows.iter().zip(&sol.alpha).zip(&y) {
                if a != 0.0 {
                    for &(t, v) in &x.entries {
                        w[t] += a * yi * v;
                    }
                }
            }
            (w, sol.bias, sol.iterations, sol.converged)
        })
        .collect();

    let mut weights = Vec::with_capacity(fits.len());
    let mut biases = Vec::with_capacity(fits.len());
    let mut iterations = Vec::with_capacity(fits.len());
    let mut converged = true;
    for ((w, b, it, ok), category) in fits.into_iter().zip(&data.categories) {
        if !ok {
            log::warn!("SVM for {category:?} hit the epoch limit after {it} updates");
        }
        if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLoss { category: category.clone() });
        }
        converged &= ok;
        weights.push(w);
        biases.push(b);
        iterations.push(it);
    }

    Ok(Model {
        format_version: FORMAT_VERSION,
        kind: ModelKind::Svm,
        categories: data.categories,
        vocab_hash: matrix.vocab_hash.clone(),
        n_features: dim,
        params: Params::Linear { weights, biases, c: config.c },
        train_config: *config,
        converged,
        iterations,
    })
}
