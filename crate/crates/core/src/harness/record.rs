use crate::inference::{EstimateReport, Method, report};

/// One method's result on one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub method: Method,
    pub fhat_id: String,
    pub n_lab: usize,
    pub n_unlab: usize,
    pub beta_hat: f64,
    pub se: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub covered: bool,
    pub rejected_at_05: bool,
    /// `ok`, or the tag of the error that stopped this method.
    pub status: String,
}

pub const STATUS_OK: &str = "ok";

impl ReplicateRecord {
    pub fn from_report(
        replicate: usize,
        est: &EstimateReport,
        beta1_star: f64,
        ci_level: f64,
        fhat_id: &str,
    ) -> Self {
        let mut rec = Self::failure(replicate, est.method, fhat_id, est.n_lab, est.n_unlab, STATUS_OK);
        rec.beta_hat = est.estimate();
        rec.se = est.se;
        match report(est, beta1_star, ci_level) {
            Ok(inf) => {
                rec.t_stat = inf.t;
                rec.p_value = inf.p;
                rec.ci_lo = inf.ci.0;
                rec.ci_hi = inf.ci.1;
                rec.covered = inf.ci.0 <= beta1_star && beta1_star <= inf.ci.1;
                rec.rejected_at_05 = inf.p < 0.05;
            }
            Err(e) => rec.status = e.tag().to_string(),
        }
        rec
    }

    pub fn failure(
        replicate: usize,
        method: Method,
        fhat_id: &str,
        n_lab: usize,
        n_unlab: usize,
        status: &str,
    ) -> Self {
        Self {
            replicate,
            method,
            fhat_id: fhat_id.to_string(),
            n_lab,
            n_unlab,
            beta_hat: f64::NAN,
            se: f64::NAN,
            t_stat: f64::NAN,
            p_value: f64::NAN,
            ci_lo: f64::NAN,
            ci_hi: f64::NAN,
            covered: false,
            rejected_at_05: false,
            status: status.to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}
