use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::stats;

use super::spline::{SmootherConfig, SplineBasis, SplineSmoother};

pub const MIN_ROWS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveConfig {
    pub smoother: SmootherConfig,
    pub max_iters: usize,
    /// Convergence when no component moves by more than `tol_factor * sd(y)`.
    pub tol_factor: f64,
}

impl Default for AdditiveConfig {
    fn default() -> Self {
        Self {
            smoother: SmootherConfig::default(),
            max_iters: 50,
            tol_factor: 1e-6,
        }
    }
}

/// `y ~ intercept + sum_j g_j(z_j)` with every `g_j` centered on the training data.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveModel {
    pub intercept: f64,
    pub components: Vec<SplineSmoother>,
    pub converged: bool,
    pub n_backfit_iters: usize,
    /// Training residual sum of squares after each sweep.
    pub sweep_rss: Vec<f64>,
}

impl AdditiveModel {
    pub fn predict(&self, z: &FeatureMatrix) -> Result<Vec<f64>> {
        if z.cols() != self.components.len() {
            return Err(Error::DimensionMismatch(format!(
                "model has {} components but input has {} columns",
                self.components.len(),
                z.cols()
            )));
        }
        let mut out = vec![self.intercept; z.rows()];
        for (j, comp) in self.components.iter().enumerate() {
            for (o, &v) in out.iter_mut().zip(z.col(j)) {
                *o += comp.value_at(v);
            }
        }
        Ok(out)
    }

    pub fn component_values(&self, j: usize, x: &[f64]) -> Vec<f64> {
        self.components[j].predict(x)
    }
}

/// Backfitting: start from zero components and `intercept = mean(y)`, then
/// cycle through coordinates smoothing partial residuals, re-centering each
/// component after every update.
pub fn fit_additive(z: &FeatureMatrix, y: &[f64], config: &AdditiveConfig) -> Result<AdditiveModel> {
    let (n, p) = (z.rows(), z.cols());
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} responses for {n} feature rows",
            y.len()
        )));
    }
    if n < MIN_ROWS {
        return Err(Error::TooFewPoints {
            needed: MIN_ROWS,
            got: n,
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("additive model response"));
    }

    let bases = (0..p)
        .map(|j| SplineBasis::new(z.col(j), &config.smoother))
        .collect::<Result<Vec<_>>>()?;

    let intercept = stats::mean(y);
    let tol = config.tol_factor * stats::sd(y);
    let mut fitted = vec![vec![0.0; n]; p];
    let mut smoothers: Vec<SplineSmoother> = (0..p)
        .map(|j| {
            let col = z.col(j);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            SplineSmoother::constant(0.0, (lo, hi))
        })
        .collect();

    let mut partial = vec![0.0; n];
    let mut sweep_rss = Vec::new();
    let mut converged = false;
    let mut iters = 0;

    while iters < config.max_iters {
        iters += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            for (i, r) in partial.iter_mut().enumerate() {
                let others: f64 = (0..p).filter(|&k| k != j).map(|k| fitted[k][i]).sum();
                *r = y[i] - intercept - others;
            }
            let fit = bases[j].fit(&partial, &config.smoother);
            let centre = stats::mean(&fit.fitted);
            let mut smoother = bases[j].smoother_from(&fit);
            smoother.shift(-centre);
            for (old, new) in fitted[j].iter_mut().zip(&fit.fitted) {
                let new = new - centre;
                max_change = max_change.max((new - *old).abs());
                *old = new;
            }
            smoothers[j] = smoother;
        }
        let rss: f64 = (0..n)
            .map(|i| {
                let f: f64 = intercept + (0..p).map(|k| fitted[k][i]).sum::<f64>();
                (y[i] - f) * (y[i] - f)
            })
            .sum();
        sweep_rss.push(rss);
        if max_change <= tol {
            converged = true;
            break;
        }
    }

    Ok(AdditiveModel {
        intercept,
        components: smoothers,
        converged,
        n_backfit_iters: iters,
        sweep_rss,
    })
}
