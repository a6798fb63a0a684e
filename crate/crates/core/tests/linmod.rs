use nalgebra::{DMatrix, DVector};
use predinfer::linmod::{DesignMatrix, SeMode, ols_fit, simple_ols};
use predinfer::rng;
use proptest::prelude::*;
use rand::RngExt;
use rand_distr::StandardNormal;

fn normal_columns(seed: u64, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let mut r = rng::stream(seed);
    (0..cols)
        .map(|_| (0..rows).map(|_| r.sample(StandardNormal)).collect())
        .collect()
}

/// `(X'X)^-1 X'y` by explicit inversion, independent of the QR path.
fn normal_equations(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    let xtx = x.transpose() * &x;
    let inv = xtx.try_inverse().expect("invertible");
    (inv * x.transpose() * DVector::from_column_slice(y)).as_slice().to_vec()
}

#[test]
fn beta_matches_normal_equations() {
    let cols = normal_columns(1, 50, 3);
    let y = normal_columns(2, 50, 1).remove(0);
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    let fit = ols_fit(&DesignMatrix::from_columns(&refs).unwrap(), &y).unwrap();
    let oracle = normal_equations(&cols, &y);
    for (a, b) in fit.beta.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn covariances_match_explicit_formulas() {
    let cols = normal_columns(3, 40, 2);
    let y = normal_columns(4, 40, 1).remove(0);
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    let design = DesignMatrix::with_intercept(&refs).unwrap();
    let fit = ols_fit(&design, &y).unwrap();

    let (n, p) = (design.rows(), design.cols());
    let x = DMatrix::from_fn(n, p, |i, j| design.get(i, j));
    let bread = (x.transpose() * &x).try_inverse().unwrap();
    let r = DVector::from_column_slice(&fit.residuals);
    let sigma2 = r.norm_squared() / (n - p) as f64;
    let meat = x.transpose() * DMatrix::from_diagonal(&r.component_mul(&r)) * &x;
    let sandwich = &bread * meat * &bread;
    let model = &bread * sigma2;
    assert!((fit.sigma2_hat - sigma2).abs() < 1e-12);
    for i in 0..p {
        for j in 0..p {
            assert!((fit.model_cov[(i, j)] - model[(i, j)]).abs() < 1e-10);
            assert!((fit.sandwich_cov[(i, j)] - sandwich[(i, j)]).abs() < 1e-10);
        }
    }
}

#[test]
fn model_se_close_to_closed_form() {
    let mut r = rng::stream(5);
    let x: Vec<f64> = (0..200).map(|_| r.sample(StandardNormal)).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|v| 1.0 + 0.5 * v + r.sample::<f64, _>(StandardNormal))
        .collect();
    let fit = ols_fit(&DesignMatrix::intercept_and(&x).unwrap(), &y).unwrap();
    let mx = x.iter().sum::<f64>() / 200.0;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let oracle = 1.0 / sxx.sqrt();
    let se = fit.coefficient_se(1, SeMode::Model).unwrap();
    assert!((se / oracle - 1.0).abs() < 0.3, "{se} vs {oracle}");
}

#[test]
fn sandwich_agrees_with_model_se_under_homoskedasticity() {
    let (mut model, mut sandwich) = (0.0, 0.0);
    let mut r = rng::stream(6);
    for _ in 0..200 {
        let x: Vec<f64> = (0..500).map(|_| r.sample(StandardNormal)).collect();
        let y: Vec<f64> = x.iter().map(|v| v + r.sample::<f64, _>(StandardNormal)).collect();
        let fit = ols_fit(&DesignMatrix::intercept_and(&x).unwrap(), &y).unwrap();
        model += fit.coefficient_se(1, SeMode::Model).unwrap();
        sandwich += fit.coefficient_se(1, SeMode::Sandwich).unwrap();
    }
    let ratio = sandwich / model;
    assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
}

#[test]
fn near_collinear_design_is_rank_deficient() {
    let a: Vec<f64> = (0..20).map(|i| i as f64).collect();
    let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 1e-13).collect();
    let y = a.clone();
    let err = ols_fit(&DesignMatrix::with_intercept(&[&a, &b]).unwrap(), &y).unwrap_err();
    assert_eq!(err.tag(), "rank_deficient");
}

fn design_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (5usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        )
    })
}

fn spread(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn refit_of_fitted_values_is_exact((x, beta_src) in design_strategy()) {
        prop_assume!(spread(&x) > 1e-3);
        let design = DesignMatrix::intercept_and(&x).unwrap();
        let beta = [beta_src[0], beta_src[1]];
        let y = design.mul_vec(&beta);
        let fit = ols_fit(&design, &y).unwrap();
        for (a, b) in fit.beta.iter().zip(&beta) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()) * 10.0);
        }
        let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(fit.residuals.iter().all(|r| r.abs() < 1e-10 * scale));
    }

    #[test]
    fn affine_response_change_scales_slope_and_keeps_t(
        (x, y) in design_strategy(),
        a in prop::sample::select(vec![-3.0, -0.5, 0.25, 2.0, 7.0]),
        b in -5.0f64..5.0,
    ) {
        prop_assume!(spread(&x) > 1e-3 && spread(&y) > 1e-3);
        let design = DesignMatrix::intercept_and(&x).unwrap();
        let f1 = ols_fit(&design, &y).unwrap();
        let y2: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        let f2 = ols_fit(&design, &y2).unwrap();
        prop_assert!((f2.beta[1] - a * f1.beta[1]).abs() < 1e-8 * (1.0 + f1.beta[1].abs()));
        let se1 = f1.coefficient_se(1, SeMode::Model).unwrap();
        let se2 = f2.coefficient_se(1, SeMode::Model).unwrap();
        prop_assume!(se1 > 1e-8);
        let (t1, t2) = (f1.beta[1] / se1, f2.beta[1] / se2);
        prop_assert!((t2 - a.signum() * t1).abs() < 1e-6 * (1.0 + t1.abs()));
    }

    #[test]
    fn standard_errors_are_nonnegative((x, y) in design_strategy()) {
        prop_assume!(spread(&x) > 1e-3);
        let fit = ols_fit(&DesignMatrix::intercept_and(&x).unwrap(), &y).unwrap();
        for j in 0..2 {
            prop_assert!(fit.coefficient_se(j, SeMode::Model).unwrap() >= 0.0);
            prop_assert!(fit.coefficient_se(j, SeMode::Sandwich).unwrap() >= 0.0);
        }
    }

    #[test]
    fn simple_fit_matches_general_fit((x, y) in design_strategy()) {
        prop_assume!(spread(&x) > 1e-3);
        let a = simple_ols(&x, &y).unwrap();
        let b = ols_fit(&DesignMatrix::intercept_and(&x).unwrap(), &y).unwrap();
        prop_assert!((a.slope - b.beta[1]).abs() < 1e-9 * (1.0 + b.beta[1].abs()));
        prop_assert!((a.intercept - b.beta[0]).abs() < 1e-9 * (1.0 + b.beta[0].abs()));
        let se = b.coefficient_se(1, SeMode::Model).unwrap();
        prop_assert!((a.slope_se - se).abs() < 1e-9 * (1.0 + se));
    }
}
