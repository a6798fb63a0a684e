use std::path::{Path, PathBuf};

use crate::data::csv_error;
use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::record::ReplicateRecord;
use super::runner::run_records;
use super::summary::{ExperimentSummary, quantile_probs, summarize};

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const QUANTILES_FILE: &str = "t_quantiles.csv";

pub const RECORDS_HEADER: [&str; 14] = [
    "replicate",
    "method",
    "fhat_id",
    "n_lab",
    "n_unlab",
    "beta_hat",
    "se",
    "t_stat",
    "p_value",
    "ci_lo",
    "ci_hi",
    "covered",
    "rejected_at_05",
    "status",
];

pub const SUMMARY_HEADER: [&str; 10] = [
    "method",
    "fhat_id",
    "n_lab",
    "n_unlab",
    "replicates",
    "rejection_rate",
    "coverage",
    "ks_stat",
    "mean_beta",
    "sd_beta",
];

/// Paths of the files written by [`run_experiment`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentOutput {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub t_quantiles: PathBuf,
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn finish(path: &Path, mut w: csv::Writer<std::fs::File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_records(path: &Path, records: &[ReplicateRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RECORDS_HEADER).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.write_record([
            r.replicate.to_string(),
            r.method.tag().to_string(),
            r.fhat_id.clone(),
            r.n_lab.to_string(),
            r.n_unlab.to_string(),
            num(r.beta_hat),
            num(r.se),
            num(r.t_stat),
            num(r.p_value),
            num(r.ci_lo),
            num(r.ci_hi),
            r.covered.to_string(),
            r.rejected_at_05.to_string(),
            r.status.clone(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

pub fn write_summary(path: &Path, summary: &ExperimentSummary) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER).map_err(|e| csv_error(path, e))?;
    for c in &summary.cells {
        w.write_record([
            c.method.tag().to_string(),
            c.fhat_id.clone(),
            c.n_lab.to_string(),
            c.n_unlab.to_string(),
            c.replicates.to_string(),
            num(c.rejection_rate),
            num(c.coverage),
            num(c.ks_stat),
            num(c.mean_beta),
            num(c.sd_beta),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

/// Long format: one row per cell and probability.
pub fn write_t_quantiles(path: &Path, summary: &ExperimentSummary) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["method", "fhat_id", "n_lab", "n_unlab", "prob", "normal_quantile", "t_quantile"])
        .map_err(|e| csv_error(path, e))?;
    let probs = quantile_probs();
    for c in &summary.cells {
        for (p, q) in probs.iter().zip(&c.t_quantiles) {
            w.write_record([
                c.method.tag().to_string(),
                c.fhat_id.clone(),
                c.n_lab.to_string(),
                c.n_unlab.to_string(),
                num(*p),
                num(crate::stats::normal_quantile(*p)),
                num(*q),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
    }
    finish(path, w)
}

/// Run the full grid and write records, summary and t-quantile CSVs into
/// `out_dir`, creating it if needed.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutput> {
    let records = run_records(config)?;
    let summary = summarize(&records);
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let out = ExperimentOutput {
        records: out_dir.join(RECORDS_FILE),
        summary: out_dir.join(SUMMARY_FILE),
        t_quantiles: out_dir.join(QUANTILES_FILE),
    };
    write_records(&out.records, &records)?;
    write_summary(&out.summary, &summary)?;
    write_t_quantiles(&out.t_quantiles, &summary)?;
    Ok(out)
}
