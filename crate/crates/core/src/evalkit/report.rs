use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{ConfusionMatrix, Metrics};
use crate::error::{Error, Result};
use crate::pipeline::PipelineSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineInfo {
    pub cpu: String,
    pub threads: usize,
    pub timestamp_unix: u64,
}

impl MachineInfo {
    pub fn current() -> Self {
        let cpu = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|s| {
                s.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split_once(':'))
                    .map(|(_, v)| v.trim().to_owned())
            })
            .unwrap_or_else(|| std::env::consts::ARCH.to_owned());
        MachineInfo {
            cpu,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pipeline: String,
    pub spec: PipelineSpec,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub confusion: ConfusionMatrix,
    pub folds: usize,
    pub seed: u64,
    pub fold_accuracies: Vec<f64>,
    pub cv_accuracy_mean: f64,
    pub cv_accuracy_std: f64,
    pub ms_per_email: Option<f64>,
    pub machine: MachineInfo,
}

pub const TABLE_HEADER: [&str; 13] = [
    "pipeline",
    "micro_p",
    "micro_r",
    "micro_f1",
    "macro_p",
    "macro_r",
    "macro_f1",
    "weighted_p",
    "weighted_r",
    "weighted_f1",
    "cv_accuracy",
    "cv_accuracy_std",
    "ms_per_email",
];

/// One row per report in the column layout of the pipeline comparison table.
pub fn write_table_csv<W: Write>(reports: &[EvalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Validation(format!("writing CSV: {e}"));
    w.write_record(TABLE_HEADER).map_err(to_err)?;
    for r in reports {
        let m = &r.metrics;
        let mut row = vec![r.pipeline.clone()];
        for prf in [m.micro, m.macro_avg, m.weighted] {
            row.extend([prf.precision, prf.recall, prf.f1].map(|v| format!("{v:.4}")));
        }
        row.push(format!("{:.4}", r.cv_accuracy_mean));
        row.push(format!("{:.4}", r.cv_accuracy_std));
        row.push(r.ms_per_email.map_or_else(String::new, |v| format!("{v:.4}")));
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Validation(format!("writing CSV: {e}")))?;
    Ok(())
}
