//! Penalized cubic regression splines with GCV-selected smoothing.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::stats;

const DEGREE: usize = 3;
const ORDER: usize = DEGREE + 1;
pub const MIN_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SmootherConfig {
    pub interior_knots: usize,
    /// Candidate penalties, ascending.
    pub lambda_grid: Vec<f64>,
    /// Extra half-decade steps tried past either end of the grid when the
    /// GCV minimum lands on the boundary.
    pub max_widen_steps: usize,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            interior_knots: 10,
            lambda_grid: (0..21).map(|k| 10f64.powf(-6.0 + 0.5 * k as f64)).collect(),
            max_widen_steps: 8,
        }
    }
}

/// A fitted univariate smoother `x -> g(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSmoother {
    /// Strictly increasing breakpoints: `min(x)`, interior quantile knots, `max(x)`.
    pub knots: Vec<f64>,
    pub basis_coefs: Vec<f64>,
    pub penalty_lambda: f64,
    pub x_range: (f64, f64),
    pub resid_sd: f64,
    /// Trace of the smoother hat matrix at the selected penalty.
    pub edf: f64,
    /// Set when GCV still preferred the outermost penalty after widening.
    pub lambda_on_grid_edge: bool,
    knot_vector: Vec<f64>,
}

impl SplineSmoother {
    pub fn predict(&self, x_new: &[f64]) -> Vec<f64> {
        x_new.iter().map(|&x| self.value_at(x)).collect()
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        if x < lo {
            self.inside(lo) + self.boundary_slope(false) * (x - lo)
        } else if x > hi {
            self.inside(hi) + self.boundary_slope(true) * (x - hi)
        } else {
            self.inside(x)
        }
    }

    /// A smoother that is identically `value`.
    pub fn constant(value: f64, x_range: (f64, f64)) -> Self {
        Self {
            knots: vec![x_range.0, x_range.1],
            basis_coefs: vec![value; ORDER],
            penalty_lambda: 0.0,
            x_range,
            resid_sd: 0.0,
            edf: 1.0,
            lambda_on_grid_edge: false,
            knot_vector: clamped_knot_vector(&[x_range.0, x_range.1]),
        }
    }

    pub(crate) fn shift(&mut self, delta: f64) {
        // B-splines form a partition of unity.
        for c in &mut self.basis_coefs {
            *c += delta;
        }
    }

    fn inside(&self, x: f64) -> f64 {
        let (first, vals) = basis_row(&self.knot_vector, x);
        vals.iter()
            .enumerate()
            .map(|(k, v)| v * self.basis_coefs[first + k])
            .sum()
    }

    fn boundary_slope(&self, right: bool) -> f64 {
        let b = &self.knots;
        let c = &self.basis_coefs;
        let k = c.len();
        if right {
            DEGREE as f64 * (c[k - 1] - c[k - 2]) / (b[b.len() - 1] - b[b.len() - 2])
        } else {
            DEGREE as f64 * (c[1] - c[0]) / (b[1] - b[0])
        }
    }
}

fn clamped_knot_vector(breaks: &[f64]) -> Vec<f64> {
    let mut t = Vec::with_capacity(breaks.len() + 2 * DEGREE);
    t.extend(std::iter::repeat_n(breaks[0], DEGREE));
    t.extend_from_slice(breaks);
    t.extend(std::iter::repeat_n(breaks[breaks.len() - 1], DEGREE));
    t
}

/// Index of the first nonzero basis function at `x` and the four nonzero values.
fn basis_row(t: &[f64], x: f64) -> (usize, [f64; ORDER]) {
    let n_basis = t.len() - ORDER;
    // Span s with t[s] <= x < t[s+1], restricted to DEGREE..n_basis-1.
    let span = {
        let upper = t[n_basis];
        if x >= upper {
            n_basis - 1
        } else {
            let idx = t[DEGREE..=n_basis].partition_point(|&k| k <= x);
            (DEGREE + idx).saturating_sub(1).max(DEGREE)
        }
    };
    let mut n = [0.0; ORDER];
    let mut left = [0.0; ORDER];
    let mut right = [0.0; ORDER];
    n[0] = 1.0;
    for j in 1..=DEGREE {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { n[r] / denom };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    (span - DEGREE, n)
}

/// Second divided differences over the Greville abscissae, rescaled to the
/// unit interval. Its null space is exactly the linear functions of `x`.
fn penalty_matrix(t: &[f64], n_basis: usize) -> DMatrix<f64> {
    let lo = t[0];
    let width = t[t.len() - 1] - lo;
    let greville: Vec<f64> = (0..n_basis)
        .map(|i| (t[i + 1..i + ORDER].iter().sum::<f64>() / DEGREE as f64 - lo) / width)
        .collect();
    let mut d = DMatrix::<f64>::zeros(n_basis - 2, n_basis);
    for i in 0..n_basis - 2 {
        let h0 = greville[i + 1] - greville[i];
        let h1 = greville[i + 2] - greville[i + 1];
        d[(i, i)] = 1.0 / h0;
        d[(i, i + 1)] = -1.0 / h0 - 1.0 / h1;
        d[(i, i + 2)] = 1.0 / h1;
    }
    d
}

/// Interior knots at evenly spaced empirical quantiles, duplicates removed.
fn quantile_breakpoints(x: &[f64], interior: usize) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let mut breaks = vec![lo];
    for k in 1..=interior {
        let q = stats::quantile_sorted(&sorted, k as f64 / (interior + 1) as f64);
        if q > *breaks.last().unwrap() && q < hi {
            breaks.push(q);
        }
    }
    breaks.push(hi);
    breaks
}

/// Basis, penalty and spectral decomposition for one fixed set of abscissae.
///
/// With `G = B'B = L L'` and `L^-1 D'D L^-T = U diag(e) U'`, the penalized
/// solution for any lambda is `c = T diag(1 / (1 + lambda e)) T' B'y` with
/// `T = L^-T U`, and the effective degrees of freedom are
/// `sum 1 / (1 + lambda e)`. One decomposition serves every lambda and every
/// response vector (backfitting reuses it across sweeps).
#[derive(Debug, Clone)]
pub(crate) struct SplineBasis {
    breaks: Vec<f64>,
    rows: Vec<(usize, [f64; ORDER])>,
    transform: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    x_range: (f64, f64),
}

pub(crate) struct PenalizedFit {
    pub coefs: Vec<f64>,
    pub fitted: Vec<f64>,
    pub lambda: f64,
    pub edf: f64,
    pub rss: f64,
    pub on_edge: bool,
}

impl SplineBasis {
    pub fn new(x: &[f64], config: &SmootherConfig) -> Result<Self> {
        if x.len() < MIN_POINTS {
            return Err(Error::TooFewPoints {
                needed: MIN_POINTS,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("smoother abscissae"));
        }
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return Err(Error::DegenerateInput("smoother abscissae have zero variance".into()));
        }

        let breaks = quantile_breakpoints(x, config.interior_knots);
        let t = clamped_knot_vector(&breaks);
        let n_basis = t.len() - ORDER;
        let rows: Vec<_> = x.iter().map(|&xi| basis_row(&t, xi)).collect();

        let mut gram = DMatrix::<f64>::zeros(n_basis, n_basis);
        for (first, vals) in &rows {
            for a in 0..ORDER {
                for b in 0..ORDER {
                    gram[(first + a, first + b)] += vals[a] * vals[b];
                }
            }
        }
        let d = penalty_matrix(&t, n_basis);
        let penalty = d.transpose() * d;

        let chol = match gram.clone().cholesky() {
            Some(c) => c,
            None => {
                // Knot spans without data leave G singular; a tiny ridge keeps
                // the decomposition defined without visibly changing fits.
                let ridge = 1e-10 * gram.trace() / n_basis as f64;
                let jittered = gram + DMatrix::<f64>::identity(n_basis, n_basis) * ridge;
                jittered
                    .cholesky()
                    .ok_or_else(|| Error::DegenerateInput("spline Gram matrix is singular".into()))?
            }
        };
        let l = chol.l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateInput("spline Gram factor is singular".into()))?;
        let m = &l_inv * penalty * l_inv.transpose();
        let m = (&m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(m);
        let transform = l_inv.transpose() * &eig.eigenvectors;
        let eigenvalues = eig.eigenvalues.iter().map(|e| e.max(0.0)).collect();

        Ok(Self {
            breaks,
            rows,
            transform,
            eigenvalues,
            x_range: (lo, hi),
        })
    }

    /// Fit `y` with the GCV-optimal penalty.
    pub fn fit(&self, y: &[f64], config: &SmootherConfig) -> PenalizedFit {
        let n = self.rows.len() as f64;
        let k = self.eigenvalues.len();
        let mut bty = DVector::<f64>::zeros(k);
        for ((first, vals), yi) in self.rows.iter().zip(y) {
            for (a, v) in vals.iter().enumerate() {
                bty[first + a] += v * yi;
            }
        }
        let b_tilde = self.transform.transpose() * bty;
        let yty: f64 = y.iter().map(|v| v * v).sum();

        let gcv = |lambda: f64| -> f64 {
            let mut edf = 0.0;
            let mut explained = 0.0;
            for (e, b) in self.eigenvalues.iter().zip(b_tilde.iter()) {
                let s = 1.0 / (1.0 + lambda * e);
                edf += s;
                explained += (2.0 * s - s * s) * b * b;
            }
            let rss = (yty - explained).max(0.0);
            let dof = n - edf;
            if dof <= 0.0 {
                f64::INFINITY
            } else {
                n * rss / (dof * dof)
            }
        };

        let mut grid = config.lambda_grid.clone();
        let mut scores: Vec<f64> = grid.iter().map(|&l| gcv(l)).collect();
        let argmin = |s: &[f64]| {
            s.iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc })
                .0
        };
        let step = 10f64.sqrt();
        let mut best = argmin(&scores);
        let mut widened = 0;
        while widened < config.max_widen_steps && grid.len() > 1 {
            if best == 0 {
                let l = grid[0] / step;
                grid.insert(0, l);
                scores.insert(0, gcv(l));
            } else if best == grid.len() - 1 {
                let l = grid[grid.len() - 1] * step;
                grid.push(l);
                scores.push(gcv(l));
            } else {
                break;
            }
            widened += 1;
            best = argmin(&scores);
        }
        let on_edge = grid.len() > 1 && (best == 0 || best == grid.len() - 1);
        if on_edge {
            log::warn!(
                "GCV minimum at grid edge (lambda = {:e}) after widening",
                grid[best]
            );
        }
        let lambda = grid[best];

        let mut scaled = b_tilde.clone();
        let mut edf = 0.0;
        for (s, e) in scaled.iter_mut().zip(&self.eigenvalues) {
            let shrink = 1.0 / (1.0 + lambda * e);
            edf += shrink;
            *s *= shrink;
        }
        let coefs: Vec<f64> = (&self.transform * scaled).iter().copied().collect();
        let fitted: Vec<f64> = self
            .rows
            .iter()
            .map(|(first, vals)| vals.iter().enumerate().map(|(a, v)| v * coefs[first + a]).sum())
            .collect();
        let rss = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();

        PenalizedFit {
            coefs,
            fitted,
            lambda,
            edf,
            rss,
            on_edge,
        }
    }

    pub fn smoother_from(&self, fit: &PenalizedFit) -> SplineSmoother {
        let n = self.rows.len() as f64;
        let dof = (n - fit.edf).max(1.0);
        SplineSmoother {
            knots: self.breaks.clone(),
            basis_coefs: fit.coefs.clone(),
            penalty_lambda: fit.lambda,
            x_range: self.x_range,
            resid_sd: (fit.rss / dof).sqrt(),
            edf: fit.edf,
            lambda_on_grid_edge: fit.on_edge,
            knot_vector: clamped_knot_vector(&self.breaks),
        }
    }
}

/// Fit a penalized cubic spline of `y` on `x`, choosing the penalty by GCV.
pub fn fit_spline(x: &[f64], y: &[f64], config: &SmootherConfig) -> Result<SplineSmoother> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "smoother got {} abscissae and {} responses",
            x.len(),
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("smoother response"));
    }
    let basis = SplineBasis::new(x, config)?;
    let fit = basis.fit(y, config);
    Ok(basis.smoother_from(&fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn basis_is_a_partition_of_unity() {
        let breaks = vec![0.0, 0.2, 0.5, 0.9, 1.0];
        let t = clamped_knot_vector(&breaks);
        for &x in &[0.0, 0.1, 0.2, 0.35, 0.77, 0.95, 1.0] {
            let (first, vals) = basis_row(&t, x);
            assert!(first + ORDER <= t.len() - ORDER);
            assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-14, "x = {x}");
            assert!(vals.iter().all(|v| *v >= -1e-15));
        }
    }

    #[test]
    fn penalty_annihilates_linear_coefficients() {
        let breaks = vec![-1.0, -0.3, 0.1, 0.2, 1.4, 2.0];
        let t = clamped_knot_vector(&breaks);
        let n_basis = t.len() - ORDER;
        let d = penalty_matrix(&t, n_basis);
        // Linear functions have Greville abscissae as B-spline coefficients.
        let coefs = DVector::from_iterator(
            n_basis,
            (0..n_basis).map(|i| 2.0 + 3.0 * t[i + 1..i + ORDER].iter().sum::<f64>() / 3.0),
        );
        assert!((d * coefs).amax() < 1e-9);
    }

    #[test]
    fn identity_is_recovered() {
        let x = grid(100);
        let s = fit_spline(&x, &x, &SmootherConfig::default()).unwrap();
        let pred = s.predict(&x);
        let max_err = pred.iter().zip(&x).map(|(p, x)| (p - x).abs()).fold(0.0, f64::max);
        assert!(max_err < 1e-3, "max err {max_err}");
        assert!(s.resid_sd < 1e-3);
    }

    #[test]
    fn constant_response() {
        let x = grid(50);
        let y = vec![4.25; 50];
        let s = fit_spline(&x, &y, &SmootherConfig::default()).unwrap();
        for p in s.predict(&[-3.0, 0.0, 0.4, 1.0, 7.0]) {
            assert!((p - 4.25).abs() < 1e-8);
        }
        assert!(s.resid_sd < 1e-8);
    }

    #[test]
    fn knots_strictly_increase_with_ties() {
        let x: Vec<f64> = (0..60).map(|i| (i % 4) as f64).collect();
        let s = fit_spline(&x, &x, &SmootherConfig::default()).unwrap();
        assert!(s.knots.windows(2).all(|w| w[0] < w[1]));
        assert!((s.value_at(2.0) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn input_errors() {
        let cfg = SmootherConfig::default();
        assert!(matches!(
            fit_spline(&[1.0; 20], &grid(20), &cfg),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            fit_spline(&grid(9), &grid(9), &cfg),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(fit_spline(&grid(20), &grid(19), &cfg).is_err());
    }
}
