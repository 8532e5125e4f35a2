//! Regularized solve of `M x = V` for symmetric positive semidefinite `M`,
//! and the three-point L-curve choice of the regularization strength.

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

pub const DEFAULT_LAMBDA_MIN: f64 = 1e-4;
pub const DEFAULT_LAMBDA_MAX: f64 = 1e-2;

/// `M` diagonalized once, with `V` expressed in its eigenbasis, so the
/// solution and both L-curve norms are cheap for any `lambda`.
#[derive(Debug, Clone)]
pub struct Tikhonov {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    beta: Vec<f64>,
    zero_tol: f64,
}

impl Tikhonov {
    /// `m` is `dim x dim` row-major with `dim = v.len()`.
    pub fn new(m: &[f64], v: &[f64]) -> Result<Self> {
        let dim = v.len();
        if m.len() != dim * dim {
            return Err(Error::validation(format!(
                "matrix has {} entries, expected {dim}x{dim}",
                m.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite right-hand side".into()));
        }
        let (values, vectors) = if dim == 0 {
            (Vec::new(), Vec::new())
        } else {
            symmetric_eigen(dim, m)?
        };
        let beta = vectors
            .iter()
            .map(|q| q.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect();
        let scale = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        Ok(Tikhonov {
            values,
            vectors,
            beta,
            zero_tol: dim as f64 * f64::EPSILON * scale,
        })
    }

    /// Per-eigenvector solution coefficient `l_k b_k / (l_k^2 + lambda)`.
    /// Eigenvalues at rounding level count as exact zeros.
    fn coefficient(&self, k: usize, lambda: f64) -> f64 {
        let l = self.values[k];
        if l.abs() <= self.zero_tol {
            return 0.0;
        }
        l * self.beta[k] / (l * l + lambda)
    }

    pub fn solve(&self, lambda: f64) -> Result<Vec<f64>> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Numeric(format!("invalid regularization {lambda}")));
        }
        let mut x = vec![0.0; self.beta.len()];
        for (k, q) in self.vectors.iter().enumerate() {
            let c = self.coefficient(k, lambda);
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi += c * qi;
            }
        }
        Ok(x)
    }

    /// `||x_lambda||`.
    pub fn solution_norm(&self, lambda: f64) -> f64 {
        (0..self.beta.len())
            .map(|k| self.coefficient(k, lambda).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `||V - M x_lambda||`.
    pub fn residual_norm(&self, lambda: f64) -> f64 {
        (0..self.beta.len())
            .map(|k| (self.beta[k] - self.values[k] * self.coefficient(k, lambda)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Maximum signed curvature of the log-log L-curve sampled at
    /// `{lo, sqrt(lo hi), hi}`, parametrized by `log lambda`. Ties go to the
    /// smaller `lambda`; degenerate curves (zero norms) give `lo`.
    pub fn select_lambda(&self, lo: f64, hi: f64) -> f64 {
        if !(lo > 0.0 && hi >= lo) {
            return lo.max(0.0);
        }
        if hi == lo {
            return lo;
        }
        let grid = [lo, (lo * hi).sqrt(), hi];
        let mut x = [0.0; 3];
        let mut y = [0.0; 3];
        for (k, &l) in grid.iter().enumerate() {
            x[k] = self.residual_norm(l).ln();
            y[k] = self.solution_norm(l).ln();
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return lo;
        }
        let h = 0.5 * (hi / lo).ln();
        let d1 = |f: &[f64; 3]| {
            [
                (f[1] - f[0]) / h,
                (f[2] - f[0]) / (2.0 * h),
                (f[2] - f[1]) / h,
            ]
        };
        let (xp, yp) = (d1(&x), d1(&y));
        let xpp = (x[2] - 2.0 * x[1] + x[0]) / (h * h);
        let ypp = (y[2] - 2.0 * y[1] + y[0]) / (h * h);
        let mut best = (f64::NEG_INFINITY, lo);
        for k in 0..3 {
            let denom = (xp[k] * xp[k] + yp[k] * yp[k]).powf(1.5);
            let kappa = (xp[k] * ypp - yp[k] * xpp) / denom;
            if kappa.is_finite() && kappa > best.0 {
                best = (kappa, grid[k]);
            }
        }
        best.1.clamp(lo, hi)
    }
}

/// `argmin ||V - M x||^2 + lambda ||x||^2`.
pub fn tikhonov_solve(m: &[f64], v: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    Tikhonov::new(m, v)?.solve(lambda)
}

/// L-curve corner over `{lo, sqrt(lo hi), hi}`, always within `[lo, hi]`.
pub fn select_lambda(m: &[f64], v: &[f64], lo: f64, hi: f64) -> Result<f64> {
    Ok(Tikhonov::new(m, v)?.select_lambda(lo, hi))
}
