//! Brute-force Gaussian conditioning shared by the oracle and acceptance
//! tests.
//!
//! Every quantity is written as a linear map of independent normals
//! `(c, e_1, .., e_{n+1}, w_1, .., w_{n+1})`; a very diffuse normal prior on
//! `c` stands in for the flat one.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

pub const PRIOR_VAR: f64 = 1e6;

/// Rows are linear functionals of the independent normals, whose variances
/// are `var`.
pub struct LinearGaussian {
    pub rows: Vec<DVector<f64>>,
    pub var: DVector<f64>,
}

impl LinearGaussian {
    pub fn cov(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.component_mul(&self.var).dot(b)
    }

    /// Mean of `target` given `obs[i] = values[i]`, and its residual
    /// `target - g^T obs`.
    ///
    /// Conditional (co)variances are taken from the residuals, sums of
    /// nonnegative terms, since the textbook Schur complement cancels
    /// catastrophically under the diffuse prior.
    pub fn residual(
        &self,
        target: &DVector<f64>,
        obs: &[usize],
        values: &[f64],
    ) -> (f64, DVector<f64>) {
        let k = obs.len();
        let sbb = DMatrix::from_fn(k, k, |i, j| {
            self.cov(&self.rows[obs[i]], &self.rows[obs[j]])
        });
        let sab = DVector::from_fn(k, |i, _| self.cov(target, &self.rows[obs[i]]));
        let g = sbb.lu().solve(&sab).unwrap();
        let mean = g.dot(&DVector::from_column_slice(values));
        let mut resid = target.clone();
        for (gi, &o) in g.iter().zip(obs) {
            resid -= &self.rows[o] * *gi;
        }
        (mean, resid)
    }

    /// Mean and variance of `target` given `obs[i] = values[i]`.
    pub fn condition(&self, target: &DVector<f64>, obs: &[usize], values: &[f64]) -> (f64, f64) {
        let (mean, r) = self.residual(target, obs, values);
        (mean, self.cov(&r, &r))
    }
}

/// `c`, `v_1..v_{n+1}` and `y_1..y_{n+1}` of the state-space model as
/// rows `0`, `1..=n+1`, `n+2..=2n+2`. `omega2 = 0` gives the AR(1) chain.
pub fn ssm_system(phi: f64, sigma2: f64, omega2: f64, n: usize, prior_var: f64) -> LinearGaussian {
    let m = n + 1;
    let dim = 1 + 2 * m;
    let mut var = DVector::zeros(dim);
    var[0] = prior_var;
    for k in 0..m {
        var[1 + k] = sigma2;
        var[1 + m + k] = omega2;
    }
    let mut rows = vec![DVector::zeros(dim)];
    rows[0][0] = 1.0;
    let mut states = Vec::with_capacity(m);
    let mut v = DVector::zeros(dim);
    for t in 0..m {
        let mut next = &v * phi;
        next[0] += 1.0;
        next[1 + t] += 1.0;
        v = next;
        states.push(v.clone());
    }
    for (t, s) in states.iter().enumerate() {
        let mut y = s.clone();
        y[1 + m + t] += 1.0;
        rows.push(s.clone());
        rows.push(y);
    }
    // Reorder into c, v's, y's.
    let vs: Vec<_> = (0..m).map(|t| rows[1 + 2 * t].clone()).collect();
    let ys: Vec<_> = (0..m).map(|t| rows[2 + 2 * t].clone()).collect();
    let mut ordered = vec![rows[0].clone()];
    ordered.extend(vs);
    ordered.extend(ys);
    LinearGaussian { rows: ordered, var }
}

/// Brute-force `c`, `v_n` and `y_{n+1}` laws given `y_{1:n}`, plus
/// `cov(c, v_n | y_{1:n})`.
pub fn ssm_conditionals(
    (phi, s2, w2): (f64, f64, f64),
    y: &[f64],
    prior_var: f64,
) -> ([(f64, f64); 3], f64) {
    let n = y.len();
    let sys = ssm_system(phi, s2, w2, n, prior_var);
    let obs: Vec<usize> = (0..n).map(|t| n + 2 + t).collect();
    let (_, rc) = sys.residual(&sys.rows[0], &obs, y);
    let (_, rv) = sys.residual(&sys.rows[n], &obs, y);
    (
        [
            sys.condition(&sys.rows[0], &obs, y),
            sys.condition(&sys.rows[n], &obs, y),
            sys.condition(&sys.rows[2 * n + 2], &obs, y),
        ],
        sys.cov(&rc, &rv),
    )
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}
