//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spamtax_core::classifiers::LogisticObjective;
use spamtax_core::vectorspace::{CorpusMatrix, SparseVector};

pub fn dense_matrix(points: &[Vec<f64>]) -> CorpusMatrix {
    let dim = points[0].len();
    let rows = points
        .iter()
        .map(|p| SparseVector {
            dim,
            entries: p.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect(),
        })
        .collect();
    let ids = (0..points.len()).map(|i| format!("{i:03}")).collect();
    CorpusMatrix::from_rows(ids, rows, dim).unwrap()
}

/// Cubic-time Ward from first principles: merge cost is the increase in
/// within-cluster sum of squares, `2 |A||B| / (|A|+|B|) * |cA - cB|^2`
/// expressed on the squared-distance scale. Returns `(left, right, height, size)`.
pub fn brute_force_ward(points: &[Vec<f64>]) -> Vec<(usize, usize, f64, usize)> {
    let n = points.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let centroid = |members: &[usize]| {
        let mut c = vec![0.0; points[0].len()];
        for &m in members {
            for (ci, v) in c.iter_mut().zip(&points[m]) {
                *ci += v;
            }
        }
        c.iter().map(|v| v / members.len() as f64).collect::<Vec<_>>()
    };
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (ca, cb) = (centroid(&clusters[a].1), centroid(&clusters[b].1));
                let sq: f64 = ca.iter().zip(&cb).map(|(x, y)| (x - y) * (x - y)).sum();
                let (na, nb) = (clusters[a].1.len() as f64, clusters[b].1.len() as f64);
                let d = 2.0 * na * nb / (na + nb) * sq;
                let (lo, hi) = (clusters[a].0.min(clusters[b].0), clusters[a].0.max(clusters[b].0));
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => {
                        d < bd - 1e-12 || ((d - bd).abs() <= 1e-12 && (lo, hi) < (blo, bhi))
                    }
                };
                if better {
                    best = Some((d, lo, hi, a, b));
                }
            }
        }
        let (d, lo, hi, a, b) = best.unwrap();
        let mut members = clusters[a].1.clone();
        members.extend(&clusters[b].1);
        clusters.remove(b);
        clusters.remove(a);
        out.push((lo, hi, d.sqrt(), members.len()));
        clusters.push((n + step, members));
    }
    out
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen::<f64>() }).collect())
        .collect()
}

/// Naive Bayes by explicit token enumeration: every count is expanded into
/// that many token occurrences, class-conditional term probabilities are
/// occurrence frequencies with add-one smoothing, and a document's log joint
/// is the log prior plus one log probability per token occurrence.
pub fn brute_force_bayes(docs: &[Vec<u32>], labels: &[&str], query: &[u32]) -> BTreeMap<String, f64> {
    let v = query.len();
    let mut classes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (d, &l) in docs.iter().zip(labels) {
        let tokens = classes.entry(l).or_default();
        for (t, &count) in d.iter().enumerate() {
            tokens.extend(std::iter::repeat_n(t, count as usize));
        }
    }
    let n = labels.len() as f64;
    classes
        .iter()
        .map(|(&c, tokens)| {
            let prior = labels.iter().filter(|&&l| l == c).count() as f64 / n;
            let mut logp = prior.ln();
            for (t, &count) in query.iter().enumerate() {
                let occurrences = tokens.iter().filter(|&&x| x == t).count() as f64;
                let theta = (occurrences + 1.0) / (tokens.len() as f64 + v as f64);
                for _ in 0..count {
                    logp += theta.ln();
                }
            }
            (c.to_string(), logp)
        })
        .collect()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Letters-only pseudo-word, unique per `(prefix, i)`.
fn word(prefix: &str, mut i: usize) -> String {
    let mut s = prefix.to_string();
    loop {
        s.push((b'a' + (i % 26) as u8) as char);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    s
}

pub struct Synthetic {
    pub texts: Vec<String>,
    pub labels: Vec<String>,
}

/// Three categories with disjoint 30-word keyword pools in proportions
/// 62 / 33 / 5. Each token is, with probability 0.1, noise drawn uniformly
/// from the union of all pools, so noise also leaks other categories'
/// keywords.
pub fn synthetic_corpus(n: usize, seed: u64) -> Synthetic {
    let mut rng = seeded(seed);
    let categories = [("sexual_content", "sx", 0.62), ("personal_scams", "ps", 0.33), ("health_tech", "ht", 0.05)];
    let pools: Vec<Vec<String>> = categories
        .iter()
        .map(|(_, prefix, _)| (0..30).map(|i| word(prefix, i)).collect())
        .collect();
    let noise: Vec<&String> = pools.iter().flatten().collect();
    let mut texts = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut assigned = 0;
    for (ci, (name, _, share)) in categories.iter().enumerate() {
        let count = if ci + 1 == categories.len() { n - assigned } else { (n as f64 * share).round() as usize };
        assigned += count;
        let pool = &pools[ci];
        for _ in 0..count {
            let len = rng.gen_range(15..40);
            let tokens: Vec<&str> = (0..len)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        noise[rng.gen_range(0..noise.len())].as_str()
                    } else {
                        pool[rng.gen_range(0..pool.len())].as_str()
                    }
                })
                .collect();
            texts.push(tokens.join(" "));
            labels.push(name.to_string());
        }
    }
    Synthetic { texts, labels }
}

/// Max relative error between the analytic gradient and central differences.
pub fn gradient_check_error(rng: &mut ChaCha8Rng) -> f64 {
    let dim = rng.gen_range(1..=10);
    let n = rng.gen_range(1..=20);
    let rows: Vec<SparseVector> = (0..n)
        .map(|_| SparseVector {
            dim,
            entries: (0..dim)
                .filter_map(|j| rng.gen_bool(0.6).then(|| (j, rng.gen_range(0.0..2.0))))
                .collect(),
        })
        .collect();
    let signs: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let kappa: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
    let c = rng.gen_range(0.1..10.0);
    let obj = LogisticObjective::new(&rows, &signs, &kappa, c, dim);
    let params: Vec<f64> = (0..obj.n_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut grad = vec![0.0; params.len()];
    obj.value_grad(&params, &mut grad);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for j in 0..params.len() {
        let mut p = params.clone();
        p[j] += eps;
        let up = obj.value(&p);
        p[j] -= 2.0 * eps;
        let down = obj.value(&p);
        let fd = (up - down) / (2.0 * eps);
        let rel = (grad[j] - fd).abs() / grad[j].abs().max(fd.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    worst
}

