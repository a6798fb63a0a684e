//! Univariate penalized splines and additive models fit by backfitting.

mod additive;
mod spline;

pub use additive::{AdditiveConfig, AdditiveModel, fit_additive};
pub use spline::{MIN_POINTS, SmootherConfig, SplineSmoother, fit_spline};
