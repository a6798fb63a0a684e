//! The relationship model: a smoother `g` of outcomes on predictions plus a
//! mean-zero noise law.

use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::predictor::Predictor;
use crate::smoother::{SmootherConfig, SplineSmoother, fit_spline};
use crate::stats;

/// How outcome noise is drawn around `g(f)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    /// i.i.d. `Normal(0, resid_sd^2)`.
    #[default]
    Gaussian,
    /// Draws with replacement from the centered training residuals.
    Resample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationshipModel {
    pub ghat: SplineSmoother,
    pub resid_sd: f64,
    /// Training residuals `y - g(f)`, centered to mean zero.
    pub resid_pool: Vec<f64>,
}

impl RelationshipModel {
    /// `g(f) + noise` for already-evaluated means `g(f)`.
    pub(crate) fn add_noise<R: Rng>(&self, means: &mut [f64], mode: NoiseMode, rng: &mut R) {
        match mode {
            NoiseMode::Gaussian => {
                if self.resid_sd > 0.0 {
                    for m in means.iter_mut() {
                        let e: f64 = rng.sample(StandardNormal);
                        *m += self.resid_sd * e;
                    }
                }
            }
            NoiseMode::Resample => {
                let n = self.resid_pool.len();
                for m in means.iter_mut() {
                    *m += self.resid_pool[rng.random_range(0..n)];
                }
            }
        }
    }
}

pub fn fit_relationship_from(
    y_lab: &[f64],
    f_lab: &[f64],
    config: &SmootherConfig,
) -> Result<RelationshipModel> {
    if stats::variance(f_lab).partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::DegenerateInput("labeled predictions have zero variance".into()));
    }
    let ghat = fit_spline(f_lab, y_lab, config)?;
    let fitted = ghat.predict(f_lab);
    let mut resid: Vec<f64> = y_lab.iter().zip(&fitted).map(|(y, g)| y - g).collect();
    let m = stats::mean(&resid);
    for r in &mut resid {
        *r -= m;
    }
    Ok(RelationshipModel {
        resid_sd: ghat.resid_sd,
        ghat,
        resid_pool: resid,
    })
}

/// Fit `y_lab ~ g(f(z_lab))` with a GCV-penalized spline.
pub fn fit_relationship(lab: &LabeledDataset, fhat: &dyn Predictor) -> Result<RelationshipModel> {
    if lab.len() < crate::smoother::MIN_POINTS {
        return Err(Error::TooFewPoints {
            needed: crate::smoother::MIN_POINTS,
            got: lab.len(),
        });
    }
    let f = fhat.predict(&lab.z)?;
    fit_relationship_from(&lab.y, &f, &SmootherConfig::default())
}

/// Sample outcomes `g(v) + noise` at prediction values `v`.
pub fn sample_outcomes<R: Rng>(
    rel: &RelationshipModel,
    fhat_values: &[f64],
    noise_mode: NoiseMode,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = rel.ghat.predict(fhat_values);
    rel.add_noise(&mut out, noise_mode, rng);
    out
}
