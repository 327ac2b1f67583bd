//! Closed-form posteriors for the linear-Gaussian state-space model under a
//! flat prior on `c`.
//!
//! Given `c`, `y_{1:n} ~ N(c mu, W)` and `v_{1:n} ~ N(c mu, Sigma)` with
//! `mu_t = (1 - phi^t)/(1 - phi)`,
//! `Sigma_{st} = sigma2 phi^{|s-t|} (1 - phi^{2 min(s,t)})/(1 - phi^2)` and
//! `W = Sigma + omega2 I`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{geometric_sum, Gaussian1D};
use crate::error::{AbcError, Result};
use crate::models::LinearGaussianSsm;

/// Largest `n` accepted; the solves are dense.
pub const MAX_N: usize = 500;

#[derive(Debug, Clone)]
pub struct SsmMatrices {
    pub phi: f64,
    pub sigma2: f64,
    pub omega2: f64,
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub w: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    /// `W^{-1} mu`
    winv_mu: DVector<f64>,
    /// `W^{-1} Sigma_{:n}`
    winv_sn: DVector<f64>,
}

impl SsmMatrices {
    pub fn new(phi: f64, sigma2: f64, omega2: f64, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(AbcError::usage(format!(
                "state-space oracle needs 1 <= n <= {MAX_N}"
            )));
        }
        if !(omega2 > 0.0 && sigma2 >= 0.0) {
            return Err(AbcError::usage(
                "state-space oracle needs omega2 > 0 and sigma2 >= 0",
            ));
        }
        let mu = DVector::from_fn(n, |t, _| geometric_sum(phi, t + 1));
        let sigma = DMatrix::from_fn(n, n, |s, t| {
            let d = s.abs_diff(t) as i32;
            sigma2 * phi.powi(d) * geometric_sum(phi * phi, s.min(t) + 1)
        });
        let w = &sigma + DMatrix::identity(n, n) * omega2;
        let chol = w
            .clone()
            .cholesky()
            .ok_or_else(|| AbcError::Numerical("W is not positive definite".into()))?;
        let winv_mu = chol.solve(&mu);
        let sn = sigma.column(n - 1).into_owned();
        let winv_sn = chol.solve(&sn);
        Ok(Self {
            phi,
            sigma2,
            omega2,
            mu,
            sigma,
            w,
            chol,
            winv_mu,
            winv_sn,
        })
    }

    pub fn from_model(m: &LinearGaussianSsm) -> Result<Self> {
        Self::new(m.phi, m.sigma2, m.omega2, m.n)
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// Weights of `s1(y) = mu^T W^{-1} y`.
    pub fn s1_weights(&self) -> Vec<f64> {
        self.winv_mu.iter().copied().collect()
    }

    /// Weights of `s2(y) = Sigma_{n:} W^{-1} y`.
    pub fn s2_weights(&self) -> Vec<f64> {
        self.winv_sn.iter().copied().collect()
    }

    /// `mu^T W^{-1} mu`
    pub fn precision_c(&self) -> f64 {
        self.mu.dot(&self.winv_mu)
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }
}

/// Posterior summaries given `y_{1:n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsmPosteriors {
    pub c: Gaussian1D,
    pub vn: Gaussian1D,
    pub predictive: Gaussian1D,
    /// Mean of `(c, v_n)`.
    pub joint_mean: [f64; 2],
    /// Covariance of `(c, v_n)`.
    pub joint_cov: [[f64; 2]; 2],
}

pub fn ssm_posteriors(model: &LinearGaussianSsm, y: &[f64]) -> Result<SsmPosteriors> {
    let m = SsmMatrices::from_model(model)?;
    posteriors_from(&m, y)
}

pub fn posteriors_from(m: &SsmMatrices, y: &[f64]) -> Result<SsmPosteriors> {
    let n = m.n();
    if n < 2 || y.len() != n {
        return Err(AbcError::usage(format!(
            "state-space posteriors need n >= 2 observations matching the model, got {}",
            y.len()
        )));
    }
    let yv = DVector::from_column_slice(y);
    let s1 = m.winv_mu.dot(&yv);
    let s2 = m.winv_sn.dot(&yv);
    let a_inv = 1.0 / m.precision_c();
    let mu_n = m.mu[n - 1];
    // Sigma_{n:} W^{-1} mu and Sigma_{n:} W^{-1} Sigma_{:n}
    let b = m.winv_sn.dot(&m.mu);
    let d = m.winv_sn.dot(&m.sigma.column(n - 1));
    let snn = m.sigma[(n - 1, n - 1)];
    let phi = m.phi;

    let c_mean = a_inv * s1;
    let lead = mu_n - b;
    let vn_mean = c_mean * lead + s2;
    let filt = snn - d;
    let vn_var = filt + lead * lead * a_inv;
    let k = 1.0 + phi * mu_n - phi * b;
    let pred_mean = phi * s2 + k * a_inv * s1;
    let pred_var = m.omega2 + m.sigma2 + phi * phi * filt + k * k * a_inv;
    let cov = lead * a_inv;
    Ok(SsmPosteriors {
        c: Gaussian1D::new(c_mean, a_inv)?,
        vn: Gaussian1D::new(vn_mean, vn_var)?,
        predictive: Gaussian1D::new(pred_mean, pred_var)?,
        joint_mean: [c_mean, vn_mean],
        joint_cov: [[a_inv, cov], [cov, vn_var]],
    })
}
