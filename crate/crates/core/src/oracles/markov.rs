//! Closed forms for the Gaussian AR(1) model with flat prior on `c`.
//!
//! With `y_bar = y_bar_phi` and `y_ring = y_bar + phi y_n`:
//!
//! * `c | y_bar` under a Gaussian kernel of bandwidth `h`:
//!   `N(y_bar, sigma2/n + h^2)`.
//! * exact predictive: `N(y_ring, sigma2 + sigma2/n)`.
//! * ABC-P with the statistic `y_bar`: `N(b y_bar, a sigma2 + sigma2/n + b^2 h^2)`.
//! * ABC-P with `y_ring`, or ABC-F with `y_bar`: `N(y_ring, sigma2 + sigma2/n + h^2)`.

use serde::{Deserialize, Serialize};

use super::{geometric_sum, Gaussian1D};
use crate::error::{AbcError, Result};
use crate::models::GaussianMarkovModel;

/// Coefficients of the ABC-P predictive under the non-predictive statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbCoefficients {
    pub a: f64,
    pub b: f64,
}

/// `a = (1 - phi^{2(n+1)})/(1 - phi^2) - phi^2 (1 - phi^n)^2 / (n (1 - phi)^2)`,
/// `b = 1 + phi (1 - phi^n)/(1 - phi)`.
pub fn ab_coefficients(phi: f64, n: usize) -> Result<AbCoefficients> {
    if phi.abs() == 1.0 {
        return Err(AbcError::Singular(format!(
            "coefficients a, b have vanishing denominators at phi = {phi}"
        )));
    }
    if n == 0 {
        return Err(AbcError::usage("n must be at least 1"));
    }
    let nf = n as f64;
    let pn = phi.powi(n as i32);
    let a = (1.0 - phi.powi(2 * (n as i32 + 1))) / (1.0 - phi * phi)
        - phi * phi * (1.0 - pn).powi(2) / (nf * (1.0 - phi).powi(2));
    let b = 1.0 + phi * (1.0 - pn) / (1.0 - phi);
    Ok(AbCoefficients { a, b })
}

pub fn markov_c_posterior(model: &GaussianMarkovModel, ybar: f64, h: f64) -> Result<Gaussian1D> {
    if !(h >= 0.0) {
        return Err(AbcError::usage("h must be nonnegative"));
    }
    Gaussian1D::new(ybar, model.sigma2 / model.n as f64 + h * h)
}

/// Which predictive law to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum MarkovVariant {
    /// True posterior predictive of `y_{n+1}`.
    Exact,
    /// ABC-P target when matching `y_bar` only.
    PSbar { h: f64 },
    /// ABC-P target when matching `y_ring`.
    PRing { h: f64 },
    /// ABC-F target with `theta` drawn by matching `y_bar`.
    FSbar { h: f64 },
    /// ABC-F target `p` steps ahead.
    Multistep { p: usize, h: f64 },
}

/// Predictive law of `y_{n+1}` (or `y_{n+p}`) given `y_bar` and `y_n`.
pub fn markov_predictive(
    model: &GaussianMarkovModel,
    ybar: f64,
    yn: f64,
    variant: MarkovVariant,
) -> Result<Gaussian1D> {
    let (phi, s2, n) = (model.phi, model.sigma2, model.n as f64);
    let yring = ybar + phi * yn;
    match variant {
        MarkovVariant::Exact => Gaussian1D::new(yring, s2 + s2 / n),
        MarkovVariant::PSbar { h } => {
            let AbCoefficients { a, b } = ab_coefficients(phi, model.n)?;
            Gaussian1D::new(b * ybar, a * s2 + s2 / n + b * b * h * h)
        }
        MarkovVariant::PRing { h } | MarkovVariant::FSbar { h } => {
            Gaussian1D::new(yring, s2 + s2 / n + h * h)
        }
        MarkovVariant::Multistep { p, h } => {
            if p == 0 {
                return Err(AbcError::usage("prediction horizon must be at least 1"));
            }
            let g = geometric_sum(phi, p);
            let pp = phi.powi(p as i32);
            let mean = g * ybar + pp * yn;
            let var = s2 * geometric_sum(phi * phi, p) + g * g * (s2 / n + h * h);
            Gaussian1D::new(mean, var)
        }
    }
}

/// `E y_t = c (1 - phi^t)/(1 - phi)`.
pub fn markov_mean(c: f64, phi: f64, t: usize) -> f64 {
    c * geometric_sum(phi, t)
}

/// `Var y_t = sigma2 (1 - phi^{2t})/(1 - phi^2)`.
pub fn markov_variance(sigma2: f64, phi: f64, t: usize) -> f64 {
    sigma2 * geometric_sum(phi * phi, t)
}

/// `cov(y_s, y_t) = sigma2 phi^{|s-t|} (1 - phi^{2 min(s,t)})/(1 - phi^2)`.
pub fn markov_covariance(sigma2: f64, phi: f64, s: usize, t: usize) -> f64 {
    let d = s.abs_diff(t) as i32;
    sigma2 * phi.powi(d) * geometric_sum(phi * phi, s.min(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(phi: f64) -> GaussianMarkovModel {
        GaussianMarkovModel::new(phi, 1.0, 100, 1).unwrap()
    }

    #[test]
    fn c_posterior_examples() {
        let g = markov_c_posterior(&model(0.5), 1.02, 0.0).unwrap();
        assert_eq!(g.mean, 1.02);
        assert!((g.variance - 0.01).abs() < 1e-15);
        let g = markov_c_posterior(&model(0.5), 1.02, 0.1).unwrap();
        assert!((g.variance - 0.02).abs() < 1e-15);
    }

    #[test]
    fn iid_coefficients() {
        let c = ab_coefficients(0.0, 100).unwrap();
        assert_eq!((c.a, c.b), (1.0, 1.0));
        let m = model(0.0);
        let p = markov_predictive(&m, 0.3, 0.7, MarkovVariant::PSbar { h: 0.0 }).unwrap();
        let e = markov_predictive(&m, 0.3, 0.7, MarkovVariant::Exact).unwrap();
        assert_eq!(p.variance, e.variance);
    }

    #[test]
    fn half_phi_inflates() {
        let m = model(0.5);
        let p = markov_predictive(&m, 1.0, 2.0, MarkovVariant::PSbar { h: 0.0 }).unwrap();
        let e = markov_predictive(&m, 1.0, 2.0, MarkovVariant::Exact).unwrap();
        assert!(p.variance > e.variance);
        // a = (1 - 0.5^202)/0.75 - 0.25 (1 - 0.5^100)^2 / (100 * 0.25)
        let a = 4.0 / 3.0 - 0.01;
        assert!((ab_coefficients(0.5, 100).unwrap().a - a).abs() < 1e-12);
    }

    #[test]
    fn unit_root_is_singular() {
        assert!(matches!(
            ab_coefficients(1.0, 10),
            Err(AbcError::Singular(_))
        ));
        assert!(matches!(
            ab_coefficients(-1.0, 10),
            Err(AbcError::Singular(_))
        ));
    }

    #[test]
    fn one_step_multistep_equals_f() {
        for &phi in &[-0.7, 0.0, 0.5, 0.99, 1.0, 1.3] {
            let m = GaussianMarkovModel::new(phi, 2.0, 17, 1).unwrap();
            for &h in &[0.0, 0.1, 1.0] {
                let a =
                    markov_predictive(&m, 0.4, -1.2, MarkovVariant::Multistep { p: 1, h }).unwrap();
                let b = markov_predictive(&m, 0.4, -1.2, MarkovVariant::FSbar { h }).unwrap();
                assert!((a.mean - b.mean).abs() < 1e-12);
                assert!((a.variance - b.variance).abs() < 1e-12);
            }
        }
    }
}
