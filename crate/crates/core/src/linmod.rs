//! Dense least squares with model-based and sandwich covariance estimates.
//!
//! Fits use a Householder QR factorization with column pivoting, so the
//! normal equations are never formed explicitly and near-collinear designs
//! are reported as [`Error::RankDeficient`] instead of producing garbage.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative size below which a QR pivot counts as zero.
const RANK_TOLERANCE: f64 = 1e-10;

/// Column-major design matrix with at least as many rows as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DesignMatrix {
    pub fn from_columns(columns: &[&[f64]]) -> Result<Self> {
        let cols = columns.len();
        if cols == 0 {
            return Err(Error::DimensionMismatch("design needs at least one column".into()));
        }
        let rows = columns[0].len();
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("design columns differ in length".into()));
        }
        if rows < cols {
            return Err(Error::DimensionMismatch(format!(
                "design has {rows} rows but {cols} columns"
            )));
        }
        let values: Vec<f64> = columns.iter().flat_map(|c| c.iter().copied()).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        Ok(Self { rows, cols, values })
    }

    /// Leading column of ones followed by `columns`.
    pub fn with_intercept(columns: &[&[f64]]) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.len());
        let ones = vec![1.0; n];
        let mut all = Vec::with_capacity(columns.len() + 1);
        all.push(ones.as_slice());
        all.extend_from_slice(columns);
        Self::from_columns(&all)
    }

    /// The simple-regression design `(1, x)`.
    pub fn intercept_and(x: &[f64]) -> Result<Self> {
        Self::with_intercept(&[x])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.rows + i]
    }

    /// `X * beta`.
    pub fn mul_vec(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, b) in beta.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(self.column(j)) {
                *o += b * x;
            }
        }
        out
    }
}

/// Which covariance estimate a standard error is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeMode {
    #[default]
    Model,
    Sandwich,
}

#[derive(Debug, Clone)]
pub struct FittedLinearModel {
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `sigma2_hat * (X'X)^-1`.
    pub model_cov: DMatrix<f64>,
    /// `(X'X)^-1 (sum r_i^2 x_i x_i') (X'X)^-1`.
    pub sandwich_cov: DMatrix<f64>,
    /// `|r|^2 / (rows - cols)`; zero when the fit interpolates (rows == cols).
    pub sigma2_hat: f64,
}

impl FittedLinearModel {
    pub fn coefficient_se(&self, j: usize, mode: SeMode) -> Result<f64> {
        let p = self.beta.len();
        if j >= p {
            return Err(Error::DimensionMismatch(format!(
                "coefficient index {j} out of range for {p} coefficients"
            )));
        }
        let cov = match mode {
            SeMode::Model => &self.model_cov,
            SeMode::Sandwich => &self.sandwich_cov,
        };
        Ok(cov[(j, j)].max(0.0).sqrt())
    }

    pub fn cov(&self, mode: SeMode) -> &DMatrix<f64> {
        match mode {
            SeMode::Model => &self.model_cov,
            SeMode::Sandwich => &self.sandwich_cov,
        }
    }
}

/// Householder QR of a column-major matrix with column-norm pivoting.
struct PivotedQr {
    rows: usize,
    cols: usize,
    /// Householder vectors below the diagonal (with the leading entry), R above.
    packed: Vec<f64>,
    r_diag: Vec<f64>,
    betas: Vec<f64>,
    /// `perm[k]` is the original column placed at position `k`.
    perm: Vec<usize>,
}

impl PivotedQr {
    fn new(design: &DesignMatrix) -> Result<Self> {
        let (n, p) = (design.rows, design.cols);
        let mut a = design.values.clone();
        let mut perm: Vec<usize> = (0..p).collect();
        let mut r_diag = vec![0.0; p];
        let mut betas = vec![0.0; p];
        let mut first_pivot = 0.0;

        for k in 0..p {
            let tail_norm2 = |a: &[f64], j: usize| -> f64 {
                a[j * n + k..(j + 1) * n].iter().map(|v| v * v).sum()
            };
            let (best, best_norm2) = (k..p)
                .map(|j| (j, tail_norm2(&a, j)))
                .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if best != k {
                for i in 0..n {
                    a.swap(k * n + i, best * n + i);
                }
                perm.swap(k, best);
            }

            let norm = best_norm2.sqrt();
            if k == 0 {
                first_pivot = norm;
            }
            if norm == 0.0 || norm <= RANK_TOLERANCE * first_pivot {
                return Err(Error::RankDeficient {
                    column: perm[k],
                    pivot: norm,
                });
            }

            let head = a[k * n + k];
            let alpha = if head >= 0.0 { -norm } else { norm };
            a[k * n + k] = head - alpha;
            let v_norm2: f64 = a[k * n + k..(k + 1) * n].iter().map(|v| v * v).sum();
            let beta = 2.0 / v_norm2;
            r_diag[k] = alpha;
            betas[k] = beta;

            let (left, right) = a.split_at_mut((k + 1) * n);
            let v = &left[k * n + k..(k + 1) * n];
            for j in 0..(p - k - 1) {
                let col = &mut right[j * n + k..(j + 1) * n];
                let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
                let scale = beta * dot;
                for (c, vi) in col.iter_mut().zip(v) {
                    *c -= scale * vi;
                }
            }
        }

        Ok(Self {
            rows: n,
            cols: p,
            packed: a,
            r_diag,
            betas,
            perm,
        })
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.r_diag[i]
        } else {
            self.packed[j * self.rows + i]
        }
    }

    /// Least-squares solution of `X beta = y` in original column order.
    fn solve(&self, y: &[f64]) -> Vec<f64> {
        let (n, p) = (self.rows, self.cols);
        let mut qty = y.to_vec();
        for k in 0..p {
            let v = &self.packed[k * n + k..(k + 1) * n];
            let dot: f64 = v.iter().zip(&qty[k..]).map(|(a, b)| a * b).sum();
            let scale = self.betas[k] * dot;
            for (q, vi) in qty[k..].iter_mut().zip(v) {
                *q -= scale * vi;
            }
        }
        let mut z = vec![0.0; p];
        for i in (0..p).rev() {
            let s: f64 = (i + 1..p).map(|j| self.r(i, j) * z[j]).sum();
            z[i] = (qty[i] - s) / self.r_diag[i];
        }
        let mut beta = vec![0.0; p];
        for (k, &orig) in self.perm.iter().enumerate() {
            beta[orig] = z[k];
        }
        beta
    }

    /// `(X'X)^-1 = P R^-1 R^-T P'` in original column order.
    fn xtx_inverse(&self) -> DMatrix<f64> {
        let p = self.cols;
        let mut r_inv = DMatrix::<f64>::zeros(p, p);
        for c in 0..p {
            for i in (0..=c).rev() {
                let rhs = if i == c { 1.0 } else { 0.0 };
                let s: f64 = (i + 1..=c).map(|j| self.r(i, j) * r_inv[(j, c)]).sum();
                r_inv[(i, c)] = (rhs - s) / self.r_diag[i];
            }
        }
        let permuted = &r_inv * r_inv.transpose();
        let mut out = DMatrix::<f64>::zeros(p, p);
        for a in 0..p {
            for b in 0..p {
                out[(self.perm[a], self.perm[b])] = permuted[(a, b)];
            }
        }
        out
    }
}

pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<FittedLinearModel> {
    if y.len() != x.rows {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries but design has {} rows",
            y.len(),
            x.rows
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    let qr = PivotedQr::new(x)?;
    let beta = qr.solve(y);
    let fitted = x.mul_vec(&beta);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();

    let (n, p) = (x.rows, x.cols);
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let sigma2_hat = if n > p { rss / (n - p) as f64 } else { 0.0 };

    let bread = qr.xtx_inverse();
    let mut meat = DMatrix::<f64>::zeros(p, p);
    for a in 0..p {
        let xa = x.column(a);
        for b in a..p {
            let xb = x.column(b);
            let s: f64 = residuals
                .iter()
                .zip(xa.iter().zip(xb))
                .map(|(r, (u, v))| r * r * u * v)
                .sum();
            meat[(a, b)] = s;
            meat[(b, a)] = s;
        }
    }
    let sandwich_cov = symmetrize(&bread * meat * &bread);
    let model_cov = symmetrize(&bread * sigma2_hat);

    Ok(FittedLinearModel {
        beta,
        residuals,
        model_cov,
        sandwich_cov,
        sigma2_hat,
    })
}

/// Intercept, slope and model-based slope SE of least squares on `(1, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
}

/// Least squares on `(1, x)` from centered sums. Agrees with [`ols_fit`] on
/// `DesignMatrix::intercept_and(x)` (same rank rule, same `rows - 2` divisor)
/// but allocates nothing, which matters inside resampling loops.
pub fn simple_ols(x: &[f64], y: &[f64]) -> Result<SimpleFit> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries but design has {n} rows",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("design"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut ssx) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        sxx += dx * dx;
        sxy += dx * (yi - my);
        ssx += xi * xi;
    }
    // Pivots of the column-pivoted QR of (1, x): the larger column norm, then
    // the norm of the other column's residual on it.
    let (first, second) = if ssx > nf {
        (ssx.sqrt(), (nf * sxx / ssx).sqrt())
    } else {
        (nf.sqrt(), sxx.sqrt())
    };
    if n < 2 || !(second > RANK_TOLERANCE * first) {
        return Err(Error::RankDeficient {
            column: if ssx > nf { 0 } else { 1 },
            pivot: second,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let r = yi - intercept - slope * xi;
                r * r
            })
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SimpleFit {
        intercept,
        slope,
        slope_se,
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}
