//! Bootstrap correction: resample unlabeled rows, simulate outcomes from the
//! relationship model, refit, and summarize the replicate fits.

use rand::{Rng, RngExt};

use crate::data::{LabeledDataset, UnlabeledDataset};
use crate::error::{Error, Result};
use crate::linmod::simple_ols;
use crate::predictor::Predictor;
use crate::smoother::SmootherConfig;
use crate::stats;

use super::relationship::{NoiseMode, RelationshipModel, fit_relationship_from};
use super::{EstimateReport, Method, PredictedSample, SLOPE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapSe {
    /// Median of the per-replicate model-based SEs.
    Parametric,
    /// Standard deviation of the replicate slopes.
    Nonparametric,
}

impl BootstrapSe {
    pub fn method(self) -> Method {
        match self {
            BootstrapSe::Parametric => Method::WangBootstrapParametric,
            BootstrapSe::Nonparametric => Method::WangBootstrapNonparametric,
        }
    }
}

/// Coefficients and model SEs of the target coordinate from each replicate fit.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDraws {
    pub betas: Vec<Vec<f64>>,
    pub model_ses: Vec<f64>,
    pub n_lab: usize,
    pub n_unlab: usize,
    pub fhat_id: String,
}

impl BootstrapDraws {
    /// Coordinatewise median of the replicate coefficients.
    pub fn point_estimate(&self) -> Vec<f64> {
        let p = self.betas[0].len();
        (0..p)
            .map(|j| stats::median(&self.betas.iter().map(|b| b[j]).collect::<Vec<_>>()))
            .collect()
    }

    pub fn se(&self, mode: BootstrapSe) -> Result<f64> {
        match mode {
            BootstrapSe::Parametric => Ok(stats::median(&self.model_ses)),
            BootstrapSe::Nonparametric => {
                if self.betas.len() < 2 {
                    return Err(Error::UndefinedSe(
                        "nonparametric bootstrap SE needs at least two replicates".into(),
                    ));
                }
                let slopes: Vec<f64> = self.betas.iter().map(|b| b[SLOPE]).collect();
                Ok(stats::sd(&slopes))
            }
        }
    }

    pub fn report(&self, mode: BootstrapSe) -> Result<EstimateReport> {
        Ok(EstimateReport::new(
            mode.method(),
            self.point_estimate(),
            self.se(mode)?,
            self.n_lab,
            self.n_unlab,
            &self.fhat_id,
        ))
    }
}

fn resample_with_replacement<R: Rng>(rng: &mut R, idx: &mut [usize]) {
    let n = idx.len();
    for i in idx.iter_mut() {
        *i = rng.random_range(0..n);
    }
}

fn draws_with<R: Rng>(
    s: &PredictedSample,
    rel: &RelationshipModel,
    b: usize,
    noise: NoiseMode,
    rng: &mut R,
    mut resample: impl FnMut(&mut R, &mut [usize]),
) -> Result<BootstrapDraws> {
    if b == 0 {
        return Err(Error::InvalidConfig("bootstrap needs B >= 1".into()));
    }
    // g(f(z)) depends on the row only, so evaluate it once per unlabeled row.
    let means = rel.ghat.predict(&s.f_unlab);
    let n = s.n_unlab();
    let mut betas = Vec::with_capacity(b);
    let mut model_ses = Vec::with_capacity(b);
    let (mut idx, mut x, mut y) = (vec![0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..b {
        resample(rng, &mut idx);
        for (k, &i) in idx.iter().enumerate() {
            x[k] = s.x_unlab[i];
            y[k] = means[i];
        }
        rel.add_noise(&mut y, noise, rng);
        let fit = simple_ols(&x, &y)?;
        model_ses.push(fit.slope_se);
        betas.push(vec![fit.intercept, fit.slope]);
    }
    Ok(BootstrapDraws {
        betas,
        model_ses,
        n_lab: s.n_lab(),
        n_unlab: n,
        fhat_id: s.fhat_id.clone(),
    })
}

/// Run `b` bootstrap replicates against a fitted relationship model.
pub fn wang_bootstrap_draws<R: Rng>(
    s: &PredictedSample,
    rel: &RelationshipModel,
    b: usize,
    noise: NoiseMode,
    rng: &mut R,
) -> Result<BootstrapDraws> {
    draws_with(s, rel, b, noise, rng, resample_with_replacement)
}

/// Fit the relationship model on the labeled sample, then bootstrap.
pub fn wang_bootstrap<R: Rng>(
    s: &PredictedSample,
    b: usize,
    noise: NoiseMode,
    rng: &mut R,
) -> Result<BootstrapDraws> {
    let rel = fit_relationship_from(&s.y_lab, &s.f_lab, &SmootherConfig::default())?;
    wang_bootstrap_draws(s, &rel, b, noise, rng)
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_wang_bootstrap<R: Rng>(
    lab: &LabeledDataset,
    unlab: &UnlabeledDataset,
    fhat: &dyn Predictor,
    b: usize,
    se_mode: BootstrapSe,
    noise: NoiseMode,
    rng: &mut R,
) -> Result<EstimateReport> {
    if se_mode == BootstrapSe::Nonparametric && b < 2 {
        return Err(Error::UndefinedSe(
            "nonparametric bootstrap SE needs B >= 2".into(),
        ));
    }
    let s = PredictedSample::new(lab, unlab, fhat)?;
    wang_bootstrap(&s, b, noise, rng)?.report(se_mode)
}
