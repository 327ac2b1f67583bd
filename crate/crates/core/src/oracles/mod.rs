//! Reference distributions: closed forms for the Gaussian models and
//! simulation-based ideal predictives for the intractable ones.

use serde::{Deserialize, Serialize};

use crate::error::{AbcError, Result};
use crate::stats;

pub mod bounds;
pub mod ideal;
pub mod markov;
pub mod ssm;

pub use bounds::{acceptance_bound, AcceptanceBound, BoundKind};
pub use ideal::{ideal_predictive, lv_gap_ideal, GapIdeal};
pub use markov::{
    ab_coefficients, markov_c_posterior, markov_predictive, AbCoefficients, MarkovVariant,
};
pub use ssm::{ssm_posteriors, SsmMatrices, SsmPosteriors};

/// Univariate normal law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian1D {
    pub mean: f64,
    pub variance: f64,
}

impl Gaussian1D {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite() && mean.is_finite()) {
            return Err(AbcError::usage(format!(
                "gaussian needs finite mean and positive variance, got ({mean}, {variance})"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        stats::normal_cdf(x, self.mean, self.variance)
    }
}

/// `sum_{k<t} r^k`, exact for `r = 1`.
pub(crate) fn geometric_sum(r: f64, t: usize) -> f64 {
    if r == 1.0 {
        t as f64
    } else {
        (1.0 - r.powi(t as i32)) / (1.0 - r)
    }
}
