//! Ordinary least squares with coefficient inference.
//!
//! The solver equilibrates every column (intercept included) to unit norm and
//! runs a Householder QR on the result. Rank is judged on the condition number
//! of the equilibrated normal-equations matrix, so the accept/reject decision
//! does not depend on the units of a regressor.

mod tdist;

pub use tdist::{beta_reg, ln_gamma, two_sided_t_pvalue};

use crate::error::{Error, Result};

/// Condition number of the equilibrated normal-equations matrix above which a
/// design is treated as rank deficient.
pub const CONDITION_LIMIT: f64 = 1e10;

/// Regression inputs: `rows × cols` regressors (row-major, no intercept column)
/// and a target of length `rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    target: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, target: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: values.len() });
        }
        if target.len() != rows {
            return Err(Error::DimensionMismatch { expected: rows, got: target.len() });
        }
        if rows < cols + 2 {
            return Err(Error::TooFewRows { rows, cols, needed: cols + 2 });
        }
        if values.iter().chain(&target).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design contains non-finite values".into()));
        }
        Ok(Self { rows, cols, values, target })
    }

    /// Build from one `Vec` per observation.
    pub fn from_rows(rows: &[Vec<f64>], target: Vec<f64>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: bad.len() });
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, values, target)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }
}

/// OLS estimates with per-regressor inference. When `rank_ok` is false the
/// inference vectors are empty and the fit must not be used.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub residual_df: usize,
    pub rank_ok: bool,
}

impl FitResult {
    pub(crate) fn rejected(residual_df: usize) -> Self {
        Self {
            intercept: f64::NAN,
            coefficients: Vec::new(),
            std_errors: Vec::new(),
            t_stats: Vec::new(),
            p_values: Vec::new(),
            residual_df,
            rank_ok: false,
        }
    }

    /// Largest regressor p-value (intercept excluded).
    pub fn max_p_value(&self) -> Option<f64> {
        if !self.rank_ok {
            return None;
        }
        self.p_values.iter().copied().reduce(f64::max)
    }
}

/// Fit `y = intercept + X b` by least squares.
pub fn fit_ols(design: &DesignMatrix) -> Result<FitResult> {
    let n = design.rows;
    let k = design.cols;
    let m = k + 1;
    if n < k + 2 {
        return Err(Error::TooFewRows { rows: n, cols: k, needed: k + 2 });
    }
    let df = n - m;

    // Column-major augmented matrix with a leading intercept column.
    let mut a = vec![0.0; n * m];
    a[..n].fill(1.0);
    for j in 0..k {
        for i in 0..n {
            a[(j + 1) * n + i] = design.value(i, j);
        }
    }

    let mut scale = vec![0.0; m];
    for j in 0..m {
        let col = &mut a[j * n..(j + 1) * n];
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(FitResult::rejected(df));
        }
        col.iter_mut().for_each(|v| *v /= norm);
        scale[j] = norm;
    }

    let mut qty = design.target.clone();
    householder_qr(&mut a, n, m, &mut qty);

    // R occupies the upper triangle of the first m rows.
    let r = |i: usize, j: usize| a[j * n + i];
    let r_max = (0..m).map(|j| r(j, j).abs()).fold(0.0, f64::max);
    if (0..m).any(|j| r(j, j).abs() <= r_max * 1e-14) {
        return Ok(FitResult::rejected(df));
    }

    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v: f64 = (0..=i.min(j)).map(|l| r(l, i) * r(l, j)).sum();
            gram[i * m + j] = v;
            gram[j * m + i] = v;
        }
    }
    let eig = symmetric_eigenvalues(&mut gram, m);
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if lo.is_nan() || lo <= 0.0 || hi / lo > CONDITION_LIMIT {
        return Ok(FitResult::rejected(df));
    }

    // Back-substitution for the scaled coefficients.
    let mut beta = vec![0.0; m];
    for i in (0..m).rev() {
        let mut acc = qty[i];
        for (j, b) in beta.iter().enumerate().skip(i + 1) {
            acc -= r(i, j) * b;
        }
        beta[i] = acc / r(i, i);
    }
    let rss: f64 = qty[m..].iter().map(|v| v * v).sum();
    let sigma2 = rss / df as f64;

    // Rows of R^{-1} give diag((R'R)^{-1}).
    let mut r_inv = vec![0.0; m * m];
    for j in 0..m {
        r_inv[j * m + j] = 1.0 / r(j, j);
        for i in (0..j).rev() {
            let mut acc = 0.0;
            for l in i + 1..=j {
                acc += r(i, l) * r_inv[l * m + j];
            }
            r_inv[i * m + j] = -acc / r(i, i);
        }
    }

    let intercept = beta[0] / scale[0];
    let mut coefficients = Vec::with_capacity(k);
    let mut std_errors = Vec::with_capacity(k);
    let mut t_stats = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    for j in 1..m {
        let diag: f64 = (j..m).map(|l| r_inv[j * m + l].powi(2)).sum();
        let coef = beta[j] / scale[j];
        let se = (sigma2 * diag).sqrt() / scale[j];
        let t = if se > 0.0 {
            coef / se
        } else if coef == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(coef)
        };
        coefficients.push(coef);
        std_errors.push(se);
        t_stats.push(t);
        p_values.push(two_sided_t_pvalue(t.abs(), df as f64)?);
    }

    Ok(FitResult { intercept, coefficients, std_errors, t_stats, p_values, residual_df: df, rank_ok: true })
}

/// Point prediction `intercept + Σ b_i x_i`.
pub fn predict(fit: &FitResult, x_row: &[f64]) -> Result<f64> {
    if !fit.rank_ok {
        return Err(Error::InvalidArgument("cannot predict from a rank-deficient fit".into()));
    }
    if x_row.len() != fit.coefficients.len() {
        return Err(Error::DimensionMismatch { expected: fit.coefficients.len(), got: x_row.len() });
    }
    if x_row.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("prediction row contains non-finite values".into()));
    }
    Ok(fit.intercept + fit.coefficients.iter().zip(x_row).map(|(b, x)| b * x).sum::<f64>())
}

/// In-place Householder QR of the column-major `n × m` matrix `a`, applying the
/// same reflections to `rhs`. On return the upper triangle holds R.
fn householder_qr(a: &mut [f64], n: usize, m: usize, rhs: &mut [f64]) {
    let mut v = vec![0.0; n];
    for j in 0..m {
        let col = &a[j * n..(j + 1) * n];
        let norm = col[j..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        v[j..].copy_from_slice(&col[j..]);
        v[j] -= alpha;
        let vnorm2: f64 = v[j..].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j..m {
            let colc = &mut a[c * n..(c + 1) * n];
            let dot: f64 = v[j..].iter().zip(&colc[j..]).map(|(x, y)| x * y).sum();
            let f = 2.0 * dot / vnorm2;
            colc[j..].iter_mut().zip(&v[j..]).for_each(|(y, x)| *y -= f * x);
        }
        let dot: f64 = v[j..].iter().zip(&rhs[j..]).map(|(x, y)| x * y).sum();
        let f = 2.0 * dot / vnorm2;
        rhs[j..].iter_mut().zip(&v[j..]).for_each(|(y, x)| *y -= f * x);
    }
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn symmetric_eigenvalues(s: &mut [f64], m: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| s[i * m + j].powi(2)).sum();
        let diag: f64 = (0..m).map(|i| s[i * m + i].powi(2)).sum();
        if off <= 1e-30 * diag {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = s[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let app = s[p * m + p];
                let aqq = s[q * m + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for r in 0..m {
                    let arp = s[r * m + p];
                    let arq = s[r * m + q];
                    s[r * m + p] = c * arp - sn * arq;
                    s[r * m + q] = sn * arp + c * arq;
                }
                for r in 0..m {
                    let apr = s[p * m + r];
                    let aqr = s[q * m + r];
                    s[p * m + r] = c * apr - sn * aqr;
                    s[q * m + r] = sn * apr + c * aqr;
                }
            }
        }
    }
    (0..m).map(|i| s[i * m + i]).collect()
}
