//! Confusion matrices, averaged precision / recall / F1, stratified k-fold
//! cross-validation and per-email latency measurement.

mod bench;
mod cv;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bench::bench;
pub use cv::{cross_validate, stratified_kfold, Fold};
pub use report::{write_table_csv, EvalReport, MachineInfo, TABLE_HEADER};

/// Rows are true categories, columns predicted ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub categories: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn zeros(categories: Vec<String>) -> Self {
        let k = categories.len();
        ConfusionMatrix {
            categories,
            counts: vec![vec![0; k]; k],
        }
    }

    fn index(&self, label: &str) -> Result<usize> {
        self.categories
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    pub fn add(&mut self, truth: &str, predicted: &str) -> Result<()> {
        let (i, j) = (self.index(truth)?, self.index(predicted)?);
        self.counts[i][j] += 1;
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.categories.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    /// Adds another matrix over the same categories.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.categories != self.categories {
            return Err(Error::Validation("confusion matrices have different categories".into()));
        }
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
        Ok(())
    }
}

pub fn confusion<S: AsRef<str>, T: AsRef<str>>(
    truth: &[S],
    predicted: &[T],
    categories: &[String],
) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::Validation(format!(
            "{} true labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let mut cm = ConfusionMatrix::zeros(categories.to_vec());
    for (t, p) in truth.iter().zip(predicted) {
        cm.add(t.as_ref(), p.as_ref())?;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_class: BTreeMap<String, ClassMetrics>,
    pub micro: Prf,
    #[serde(rename = "macro")]
    pub macro_avg: Prf,
    pub weighted: Prf,
    pub accuracy: f64,
    /// Set when some ratio was 0/0 and reported as 0.
    pub zero_division: bool,
}

fn ratio(num: usize, den: usize, zero_division: &mut bool) -> f64 {
    if den == 0 {
        *zero_division = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64, zero_division: &mut bool) -> f64 {
    if p + r == 0.0 {
        *zero_division = true;
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Validation("confusion matrix is empty".into()));
    }
    let k = cm.categories.len();
    let mut zero_division = false;
    let mut per_class = BTreeMap::new();
    let (mut tp_sum, mut fp_sum, mut fn_sum) = (0, 0, 0);
    let (mut macro_sum, mut weighted_sum) = ([0.0; 3], [0.0; 3]);
    for c in 0..k {
        let tp = cm.counts[c][c];
        let support: usize = cm.counts[c].iter().sum();
        let predicted: usize = (0..k).map(|r| cm.counts[r][c]).sum();
        let (fp, fn_) = (predicted - tp, support - tp);
        tp_sum += tp;
        fp_sum += fp;
        fn_sum += fn_;
        let p = ratio(tp, tp + fp, &mut zero_division);
        let r = ratio(tp, tp + fn_, &mut zero_division);
        let f = f1(p, r, &mut zero_division);
        for (acc, v) in macro_sum.iter_mut().zip([p, r, f]) {
            *acc += v;
        }
        for (acc, v) in weighted_sum.iter_mut().zip([p, r, f]) {
            *acc += v * support as f64;
        }
        per_class.insert(
            cm.categories[c].clone(),
            ClassMetrics { precision: p, recall: r, f1: f, support },
        );
    }
    let micro_p = ratio(tp_sum, tp_sum + fp_sum, &mut zero_division);
    let micro_r = ratio(tp_sum, tp_sum + fn_sum, &mut zero_division);
    let micro = Prf {
        precision: micro_p,
        recall: micro_r,
        f1: f1(micro_p, micro_r, &mut zero_division),
    };
    let prf = |s: [f64; 3], d: f64| Prf {
        precision: s[0] / d,
        recall: s[1] / d,
        f1: s[2] / d,
    };
    Ok(Metrics {
        per_class,
        micro,
        macro_avg: prf(macro_sum, k as f64),
        weighted: prf(weighted_sum, total as f64),
        accuracy: cm.accuracy(),
        zero_division,
    })
}
