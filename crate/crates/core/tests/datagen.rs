use predinfer::datagen::{GenConfig, generate, strip_labels, true_regression};
use predinfer::linmod::{DesignMatrix, SeMode, ols_fit};

fn slope_and_se(x: &[f64], y: &[f64]) -> (f64, f64) {
    let fit = ols_fit(&DesignMatrix::intercept_and(x).unwrap(), y).unwrap();
    (fit.beta[1], fit.coefficient_se(1, SeMode::Sandwich).unwrap())
}

#[test]
fn population_slope_equals_the_linear_coefficient() {
    for beta1 in [0.0, 1.0] {
        let d = generate(&GenConfig::new(1_000_000, beta1, 91)).unwrap();
        let (b, se) = slope_and_se(d.x(), &d.y);
        assert!((b - beta1).abs() < 3.0 * se, "beta1 = {beta1}: {b} (se {se})");
    }
}

#[test]
fn large_sample_slope_within_tolerance() {
    let d = generate(&GenConfig::new(100_000, 1.0, 92)).unwrap();
    let (b, _) = slope_and_se(d.x(), &d.y);
    assert!((b - 1.0).abs() < 0.05);
}

#[test]
fn noise_is_isolated_from_the_regression() {
    let cfg = GenConfig::new(100_000, 1.0, 93);
    let d = generate(&cfg).unwrap();
    let eps: Vec<f64> = (0..d.len())
        .map(|i| d.y[i] - true_regression(&d.z.row(i), &cfg))
        .collect();
    let n = eps.len() as f64;
    let m = eps.iter().sum::<f64>() / n;
    let v = eps.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(m.abs() < 4.0 / n.sqrt(), "mean {m}");
    // sd of the sample variance of N(0,1) draws is sqrt(2/n).
    assert!((v - 1.0).abs() < 4.0 * (2.0 / n).sqrt(), "var {v}");
}

#[test]
fn null_model_has_no_linear_association() {
    let cfg = GenConfig {
        beta_tilde: [0.0; 5],
        ..GenConfig::new(20_000, 0.0, 94)
    };
    let d = generate(&cfg).unwrap();
    let n = d.len() as f64;
    let (mx, my) = (d.x().iter().sum::<f64>() / n, d.y.iter().sum::<f64>() / n);
    let cov = d.x().iter().zip(&d.y).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0);
    assert!(cov.abs() < 4.0 * cfg.noise_sd / n.sqrt());
}

#[test]
fn generation_is_deterministic_and_seed_dependent() {
    let cfg = GenConfig::new(100, 1.0, 5);
    assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
    assert_ne!(generate(&cfg).unwrap(), generate(&cfg.with_seed(6)).unwrap());
}

#[test]
fn stripping_labels_keeps_features() {
    let cfg = GenConfig::new(50, 0.0, 7);
    let d = generate(&cfg).unwrap();
    let u = strip_labels(&d);
    assert_eq!(u.z, d.z);
    assert_eq!(u.x(), d.x());
    let again = generate(&cfg).unwrap();
    assert_eq!(strip_labels(&again).z, u.z);
}

#[test]
fn features_are_uncorrelated_standard_normals() {
    let d = generate(&GenConfig::new(200_000, 0.0, 8)).unwrap();
    let n = d.len() as f64;
    for j in 0..4 {
        let c = d.z.col(j);
        let m = c.iter().sum::<f64>() / n;
        let v = c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(m.abs() < 4.0 / n.sqrt());
        assert!((v - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
        for k in 0..j {
            let r = c.iter().zip(d.z.col(k)).map(|(a, b)| a * b).sum::<f64>() / n;
            assert!(r.abs() < 4.0 / n.sqrt(), "corr({j},{k}) = {r}");
        }
    }
}
