//! Closed-form estimators built from least-squares fits on `(1, x)`.

use crate::data::{LabeledDataset, UnlabeledDataset};
use crate::error::{Error, Result};
use crate::linmod::{DesignMatrix, SeMode, ols_fit};
use crate::predictor::Predictor;
use crate::stats;

use super::{EstimateReport, Method, PredictedSample, SLOPE};

/// Which form of the analytic correction to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnalyticVariant {
    /// `gamma1 * beta_naive`.
    #[default]
    Code,
    /// `gamma0 (X'X)^-1 X'1 + gamma1 * beta_naive`.
    Publication,
}

/// OLS of the labeled outcomes on `(1, x_lab)`, model-based SE. The unlabeled
/// sample is unused; its size is still reported so results stay keyed by cell.
pub fn classical(s: &PredictedSample) -> Result<EstimateReport> {
    let fit = ols_fit(&DesignMatrix::intercept_and(&s.x_lab)?, &s.y_lab)?;
    let se = fit.coefficient_se(SLOPE, SeMode::Model)?;
    Ok(EstimateReport::new(Method::Classical, fit.beta, se, s.n_lab(), s.n_unlab(), &s.fhat_id))
}

/// OLS of the unlabeled predictions on `(1, x_unlab)`, model-based SE.
pub fn naive(s: &PredictedSample) -> Result<EstimateReport> {
    let fit = ols_fit(&DesignMatrix::intercept_and(&s.x_unlab)?, &s.f_unlab)?;
    let se = fit.coefficient_se(SLOPE, SeMode::Model)?;
    Ok(EstimateReport::new(Method::Naive, fit.beta, se, s.n_lab(), s.n_unlab(), &s.fhat_id))
}

/// Rescales the naive fit by the labeled-data regression of `y` on the
/// predictions. The SE is `|gamma1|` times the naive SE; the sampling
/// variability of `gamma1` is not propagated.
pub fn wang_analytic(s: &PredictedSample, variant: AnalyticVariant) -> Result<EstimateReport> {
    let var_f = stats::variance(&s.f_lab);
    if !(var_f > 0.0) {
        return Err(Error::DegenerateInput("labeled predictions have zero variance".into()));
    }
    let gamma1 = stats::covariance(&s.y_lab, &s.f_lab) / var_f;

    let design = DesignMatrix::intercept_and(&s.x_unlab)?;
    let fit = ols_fit(&design, &s.f_unlab)?;
    let naive_se = fit.coefficient_se(SLOPE, SeMode::Model)?;
    let mut beta: Vec<f64> = fit.beta.iter().map(|b| gamma1 * b).collect();
    let method = match variant {
        AnalyticVariant::Code => Method::WangAnalytic,
        AnalyticVariant::Publication => {
            let gamma0 = stats::mean(&s.y_lab) - gamma1 * stats::mean(&s.f_lab);
            let ones = vec![1.0; s.n_unlab()];
            let proj = ols_fit(&design, &ones)?.beta;
            for (b, p) in beta.iter_mut().zip(&proj) {
                *b += gamma0 * p;
            }
            Method::WangAnalyticPublication
        }
    };
    Ok(EstimateReport::new(
        method,
        beta,
        gamma1.abs() * naive_se,
        s.n_lab(),
        s.n_unlab(),
        &s.fhat_id,
    ))
}

/// Debiased estimate `beta_f,unlab + (beta_y,lab - beta_f,lab)`.
///
/// The rectifier is fit directly as the regression of `y - f` on `(1, x_lab)`.
/// The two fits use independent samples, so the covariance is the sum of
/// their sandwich covariances.
pub fn ppi(s: &PredictedSample) -> Result<EstimateReport> {
    let unlab_fit = ols_fit(&DesignMatrix::intercept_and(&s.x_unlab)?, &s.f_unlab)?;
    let diff: Vec<f64> = s.y_lab.iter().zip(&s.f_lab).map(|(y, f)| y - f).collect();
    let rect_fit = ols_fit(&DesignMatrix::intercept_and(&s.x_lab)?, &diff)?;

    let beta: Vec<f64> = unlab_fit
        .beta
        .iter()
        .zip(&rect_fit.beta)
        .map(|(a, b)| a + b)
        .collect();
    let var = unlab_fit.sandwich_cov[(SLOPE, SLOPE)] + rect_fit.sandwich_cov[(SLOPE, SLOPE)];
    Ok(EstimateReport::new(
        Method::Ppi,
        beta,
        var.max(0.0).sqrt(),
        s.n_lab(),
        s.n_unlab(),
        &s.fhat_id,
    ))
}

pub fn estimate_classical(lab: &LabeledDataset) -> Result<EstimateReport> {
    let fit = ols_fit(&DesignMatrix::intercept_and(lab.x())?, &lab.y)?;
    let se = fit.coefficient_se(SLOPE, SeMode::Model)?;
    Ok(EstimateReport::new(Method::Classical, fit.beta, se, lab.len(), 0, ""))
}

pub fn estimate_naive(unlab: &UnlabeledDataset, fhat: &dyn Predictor) -> Result<EstimateReport> {
    let f = fhat.predict(&unlab.z)?;
    let fit = ols_fit(&DesignMatrix::intercept_and(unlab.x())?, &f)?;
    let se = fit.coefficient_se(SLOPE, SeMode::Model)?;
    Ok(EstimateReport::new(Method::Naive, fit.beta, se, 0, unlab.len(), fhat.id()))
}

pub fn estimate_wang_analytic(
    lab: &LabeledDataset,
    unlab: &UnlabeledDataset,
    fhat: &dyn Predictor,
    variant: AnalyticVariant,
) -> Result<EstimateReport> {
    wang_analytic(&PredictedSample::new(lab, unlab, fhat)?, variant)
}

pub fn estimate_ppi(
    lab: &LabeledDataset,
    unlab: &UnlabeledDataset,
    fhat: &dyn Predictor,
) -> Result<EstimateReport> {
    ppi(&PredictedSample::new(lab, unlab, fhat)?)
}
