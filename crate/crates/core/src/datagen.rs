//! Partially linear additive data-generating model
//! `Y = b0 + b1 z1 + b2 g2(z2) + b3 g3(z3) + b4 g4(z4) + eps` with independent
//! standard-normal features and Gaussian noise.
//!
//! Because the features are independent and each `g_j` is centered for a
//! standard-normal input, the population least-squares slope of `Y` on
//! `(1, Z1)` equals `b1`.

use rand::RngExt;
use rand_distr::StandardNormal;

use crate::data::{FeatureMatrix, LabeledDataset, UnlabeledDataset};
use crate::error::{Error, Result};
use crate::rng;

pub const N_FEATURES: usize = 4;

pub fn g2(s: f64) -> f64 {
    s * s - 1.0
}

pub fn g3(s: f64) -> f64 {
    (2.0 * s).sin()
}

pub fn g4(s: f64) -> f64 {
    s.exp() - 0.5f64.exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n: usize,
    /// `(b0, b1, b2, b3, b4)`; `b1` is the target slope.
    pub beta_tilde: [f64; 5],
    pub noise_sd: f64,
    pub seed: u64,
}

impl GenConfig {
    /// Defaults: `b0 = 0`, `b2 = b3 = b4 = 1`, unit noise.
    pub fn new(n: usize, beta1_star: f64, seed: u64) -> Self {
        Self {
            n,
            beta_tilde: [0.0, beta1_star, 1.0, 1.0, 1.0],
            noise_sd: 1.0,
            seed,
        }
    }

    pub fn beta1_star(&self) -> f64 {
        self.beta_tilde[1]
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidConfig("noise_sd must be positive".into()));
        }
        if self.beta_tilde.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidConfig("coefficients must be finite".into()));
        }
        Ok(())
    }

    /// `E[Y | Z = z]`.
    pub fn true_regression(&self, z: &[f64]) -> f64 {
        let b = &self.beta_tilde;
        b[0] + b[1] * z[0] + b[2] * g2(z[1]) + b[3] * g3(z[2]) + b[4] * g4(z[3])
    }
}

pub fn true_regression(z_row: &[f64], config: &GenConfig) -> f64 {
    config.true_regression(z_row)
}

/// Draw `config.n` labeled rows. Each row consumes four feature draws and then
/// one noise draw from the stream seeded by `config.seed`.
pub fn generate(config: &GenConfig) -> Result<LabeledDataset> {
    config.validate()?;
    let mut rng = rng::stream(config.seed);
    let n = config.n;
    let mut cols: Vec<Vec<f64>> = (0..N_FEATURES).map(|_| Vec::with_capacity(n)).collect();
    let mut y = Vec::with_capacity(n);
    let mut row = [0.0; N_FEATURES];
    for _ in 0..n {
        for (c, r) in cols.iter_mut().zip(row.iter_mut()) {
            *r = rng.sample(StandardNormal);
            c.push(*r);
        }
        let eps: f64 = rng.sample(StandardNormal);
        y.push(config.true_regression(&row) + config.noise_sd * eps);
    }
    LabeledDataset::new(y, FeatureMatrix::from_columns(cols)?)
}

pub fn strip_labels(d: &LabeledDataset) -> UnlabeledDataset {
    d.strip_labels()
}
