//! Estimators of the population least-squares slope of `Y` on `(1, X)` when
//! most outcomes are replaced by predictions.
//!
//! Every estimator reports a full [`EstimateReport`] for the target
//! coordinate (the slope by default). The dataset-level entry points
//! (`estimate_*`) evaluate the predictor once and delegate to functions over
//! a [`PredictedSample`], which is also what the CLI uses for externally
//! produced predictions.

mod bootstrap;
mod linear;
mod relationship;

use std::fmt;
use std::str::FromStr;

use crate::data::{LabeledDataset, UnlabeledDataset};
use crate::error::{Error, Result};
use crate::predictor::Predictor;
use crate::stats;

pub use bootstrap::{BootstrapDraws, BootstrapSe, estimate_wang_bootstrap, wang_bootstrap, wang_bootstrap_draws};
pub use linear::{
    AnalyticVariant, classical, estimate_classical, estimate_naive, estimate_ppi,
    estimate_wang_analytic, naive, ppi, wang_analytic,
};
pub use relationship::{NoiseMode, RelationshipModel, fit_relationship, fit_relationship_from, sample_outcomes};

/// Index of the slope in the `(1, x)` design.
pub const SLOPE: usize = 1;
pub const DEFAULT_CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Naive,
    Classical,
    WangAnalytic,
    WangAnalyticPublication,
    WangBootstrapParametric,
    WangBootstrapNonparametric,
    Ppi,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Naive,
        Method::Classical,
        Method::WangAnalytic,
        Method::WangAnalyticPublication,
        Method::WangBootstrapParametric,
        Method::WangBootstrapNonparametric,
        Method::Ppi,
    ];

    /// The six methods compared in the simulation studies.
    pub const STUDY: [Method; 6] = [
        Method::Naive,
        Method::Classical,
        Method::WangAnalytic,
        Method::WangBootstrapParametric,
        Method::WangBootstrapNonparametric,
        Method::Ppi,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Classical => "classical",
            Method::WangAnalytic => "wang_analytic",
            Method::WangAnalyticPublication => "wang_analytic_pub",
            Method::WangBootstrapParametric => "wang_boot_param",
            Method::WangBootstrapNonparametric => "wang_boot_nonparam",
            Method::Ppi => "ppi",
        }
    }

    pub fn is_bootstrap(self) -> bool {
        matches!(
            self,
            Method::WangBootstrapParametric | Method::WangBootstrapNonparametric
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s.trim())
            .ok_or_else(|| {
                let known: Vec<_> = Method::ALL.iter().map(|m| m.tag()).collect();
                Error::InvalidConfig(format!("unknown method {s:?} (expected one of {})", known.join(", ")))
            })
    }
}

/// Outcomes, covariate and predictions for one labeled/unlabeled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedSample {
    pub y_lab: Vec<f64>,
    pub x_lab: Vec<f64>,
    pub f_lab: Vec<f64>,
    pub x_unlab: Vec<f64>,
    pub f_unlab: Vec<f64>,
    pub fhat_id: String,
}

impl PredictedSample {
    pub fn new(lab: &LabeledDataset, unlab: &UnlabeledDataset, fhat: &dyn Predictor) -> Result<Self> {
        Self::from_parts(
            lab.y.clone(),
            lab.x().to_vec(),
            fhat.predict(&lab.z)?,
            unlab.x().to_vec(),
            fhat.predict(&unlab.z)?,
            fhat.id(),
        )
    }

    pub fn from_parts(
        y_lab: Vec<f64>,
        x_lab: Vec<f64>,
        f_lab: Vec<f64>,
        x_unlab: Vec<f64>,
        f_unlab: Vec<f64>,
        fhat_id: impl Into<String>,
    ) -> Result<Self> {
        if y_lab.len() != x_lab.len() || f_lab.len() != x_lab.len() {
            return Err(Error::DimensionMismatch("labeled columns differ in length".into()));
        }
        if f_unlab.len() != x_unlab.len() {
            return Err(Error::DimensionMismatch("unlabeled columns differ in length".into()));
        }
        let all = [&y_lab, &x_lab, &f_lab, &x_unlab, &f_unlab];
        if all.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite("prediction sample"));
        }
        Ok(Self {
            y_lab,
            x_lab,
            f_lab,
            x_unlab,
            f_unlab,
            fhat_id: fhat_id.into(),
        })
    }

    pub fn n_lab(&self) -> usize {
        self.y_lab.len()
    }

    pub fn n_unlab(&self) -> usize {
        self.x_unlab.len()
    }
}

/// Point estimate, standard error and confidence interval for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub method: Method,
    pub beta_hat: Vec<f64>,
    pub target_j: usize,
    pub se: f64,
    pub ci_level: f64,
    pub ci: (f64, f64),
    pub n_lab: usize,
    pub n_unlab: usize,
    pub fhat_id: String,
}

/// Test statistic, two-sided p-value and interval at a null value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inference {
    pub t: f64,
    pub p: f64,
    pub ci: (f64, f64),
}

impl EstimateReport {
    pub(crate) fn new(
        method: Method,
        beta_hat: Vec<f64>,
        se: f64,
        n_lab: usize,
        n_unlab: usize,
        fhat_id: &str,
    ) -> Self {
        let mut r = Self {
            method,
            beta_hat,
            target_j: SLOPE,
            se,
            ci_level: DEFAULT_CI_LEVEL,
            ci: (f64::NAN, f64::NAN),
            n_lab,
            n_unlab,
            fhat_id: fhat_id.to_string(),
        };
        r.ci = r.interval(DEFAULT_CI_LEVEL);
        r
    }

    pub fn estimate(&self) -> f64 {
        self.beta_hat[self.target_j]
    }

    pub fn with_ci_level(mut self, level: f64) -> Result<Self> {
        check_level(level)?;
        self.ci_level = level;
        self.ci = self.interval(level);
        Ok(self)
    }

    fn interval(&self, level: f64) -> (f64, f64) {
        let z = stats::normal_quantile(0.5 + level / 2.0);
        let b = self.estimate();
        (b - z * self.se, b + z * self.se)
    }

    pub fn t_stat_at(&self, beta_null: f64) -> Result<f64> {
        if self.se <= 0.0 {
            return Err(Error::ZeroSe);
        }
        Ok((self.estimate() - beta_null) / self.se)
    }

    pub fn p_value_two_sided(&self, beta_null: f64) -> Result<f64> {
        self.t_stat_at(beta_null).map(stats::two_sided_p)
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("confidence level {level} not in (0, 1)")))
    }
}

/// Normal-theory test of `beta_null` and a `ci_level` interval.
pub fn report(est: &EstimateReport, beta_null: f64, ci_level: f64) -> Result<Inference> {
    check_level(ci_level)?;
    let t = est.t_stat_at(beta_null)?;
    Ok(Inference {
        t,
        p: stats::two_sided_p(t),
        ci: est.interval(ci_level),
    })
}
