use std::collections::BTreeMap;

use crate::inference::Method;
use crate::stats;

use super::record::ReplicateRecord;

/// Number of evenly spaced probabilities `k / 100` at which t-statistic
/// quantiles are reported.
pub const N_QUANTILES: usize = 99;

/// Aggregates for one `(method, fhat_id, n_lab, n_unlab)` cell, over the
/// records whose status is `ok`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub method: Method,
    pub fhat_id: String,
    pub n_lab: usize,
    pub n_unlab: usize,
    pub replicates: usize,
    pub failures: usize,
    pub rejection_rate: f64,
    pub coverage: f64,
    /// KS distance of the t-statistics from the standard normal.
    pub ks_stat: f64,
    /// KS distance of the p-values from the uniform.
    pub ks_pvalues_uniform: f64,
    pub median_abs_t: f64,
    pub t_quantiles: Vec<f64>,
    pub mean_beta: f64,
    pub sd_beta: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentSummary {
    pub cells: Vec<CellSummary>,
}

impl ExperimentSummary {
    pub fn cell(&self, method: Method, fhat_id: &str, n_lab: usize, n_unlab: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| {
            c.method == method && c.fhat_id == fhat_id && c.n_lab == n_lab && c.n_unlab == n_unlab
        })
    }
}

pub fn quantile_probs() -> Vec<f64> {
    (1..=N_QUANTILES).map(|k| k as f64 / (N_QUANTILES + 1) as f64).collect()
}

type CellKey = (usize, usize, String, Method);

/// Cells ordered by `(n_lab, n_unlab, fhat_id, method)`.
pub fn summarize(records: &[ReplicateRecord]) -> ExperimentSummary {
    let mut groups: BTreeMap<CellKey, Vec<&ReplicateRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.n_lab, r.n_unlab, r.fhat_id.clone(), r.method))
            .or_default()
            .push(r);
    }
    let cells = groups
        .into_iter()
        .map(|((n_lab, n_unlab, fhat_id, method), rs)| summarize_cell(method, fhat_id, n_lab, n_unlab, &rs))
        .collect();
    ExperimentSummary { cells }
}

fn summarize_cell(
    method: Method,
    fhat_id: String,
    n_lab: usize,
    n_unlab: usize,
    rs: &[&ReplicateRecord],
) -> CellSummary {
    let ok: Vec<&ReplicateRecord> = rs.iter().copied().filter(|r| r.is_ok()).collect();
    let n = ok.len();
    let frac = |pred: fn(&ReplicateRecord) -> bool| {
        if n == 0 {
            f64::NAN
        } else {
            ok.iter().filter(|r| pred(r)).count() as f64 / n as f64
        }
    };
    let t: Vec<f64> = ok.iter().map(|r| r.t_stat).collect();
    let p: Vec<f64> = ok.iter().map(|r| r.p_value).collect();
    let betas: Vec<f64> = ok.iter().map(|r| r.beta_hat).collect();
    let abs_t: Vec<f64> = t.iter().map(|v| v.abs()).collect();

    let mut sorted_t = t.clone();
    sorted_t.sort_by(f64::total_cmp);
    let t_quantiles = if n == 0 {
        vec![f64::NAN; N_QUANTILES]
    } else {
        quantile_probs().iter().map(|&q| stats::quantile_sorted(&sorted_t, q)).collect()
    };
    let or_nan = |v: f64| if n == 0 { f64::NAN } else { v };

    CellSummary {
        method,
        fhat_id,
        n_lab,
        n_unlab,
        replicates: n,
        failures: rs.len() - n,
        rejection_rate: frac(|r| r.rejected_at_05),
        coverage: frac(|r| r.covered),
        ks_stat: or_nan(stats::ks_vs_standard_normal(&t)),
        ks_pvalues_uniform: or_nan(stats::ks_vs_uniform(&p)),
        median_abs_t: or_nan(stats::median(&abs_t)),
        t_quantiles,
        mean_beta: or_nan(stats::mean(&betas)),
        sd_beta: if n < 2 { f64::NAN } else { stats::sd(&betas) },
    }
}
