//! Prediction-based inference: estimators that use machine-learning
//! predictions in place of unobserved outcomes, and a Monte Carlo harness
//! that audits their type-1 error, coverage and test-statistic calibration.
//!
//! Module map:
//! - [`linmod`]: least squares with model-based and sandwich covariances.
//! - [`smoother`]: penalized cubic splines and additive models.
//! - [`datagen`]: the partially linear additive simulation model.
//! - [`predictor`]: trained, oracle and user-supplied prediction functions.
//! - [`inference`]: naive, classical, analytic, bootstrap and debiased estimators.
//! - [`harness`]: experiment configuration, replicate runner, summaries and CSV output.

pub mod cli;
pub mod data;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod inference;
pub mod linmod;
pub mod predictor;
pub mod rng;
pub mod smoother;
pub mod stats;

pub use error::{Error, Result};
