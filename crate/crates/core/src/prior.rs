//! Box-uniform priors, optionally on a transformed parameterisation.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AbcError, Result};
use crate::rng::SimRng;
use crate::types::ParamVector;

/// Monotone per-component map applied before the box bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Transform {
    Identity,
    /// `t = ln(theta)`
    Log,
    /// `t_i = theta_i - theta_of`; `of` must precede `i`.
    ShiftBy {
        of: usize,
    },
}

/// Uniform prior on a box in transformed space.
///
/// The density is reported in transformed space, so a log-uniform prior on
/// `[-6, 2]^3` has density `1/512` at any interior point.
#[derive(Debug, Clone)]
pub struct Prior {
    lower: Vec<f64>,
    upper: Vec<f64>,
    transforms: Vec<Transform>,
    names: Arc<[String]>,
    log_volume: f64,
}

impl Prior {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        transforms: Vec<Transform>,
        names: Arc<[String]>,
    ) -> Result<Self> {
        let p = lower.len();
        if upper.len() != p || transforms.len() != p || names.len() != p {
            return Err(AbcError::usage(format!(
                "prior bounds, transforms and names must all have length {p}"
            )));
        }
        for i in 0..p {
            if !(lower[i].is_finite() && upper[i].is_finite() && lower[i] < upper[i]) {
                return Err(AbcError::usage(format!(
                    "prior component {i} has invalid bounds [{}, {}]",
                    lower[i], upper[i]
                )));
            }
            if let Transform::ShiftBy { of } = transforms[i] {
                if of >= i {
                    return Err(AbcError::usage(format!(
                        "shift transform of component {i} must reference an earlier component"
                    )));
                }
            }
        }
        let log_volume = lower.iter().zip(&upper).map(|(l, u)| (u - l).ln()).sum();
        Ok(Self {
            lower,
            upper,
            transforms,
            names,
            log_volume,
        })
    }

    /// Plain box-uniform prior.
    pub fn uniform(lower: Vec<f64>, upper: Vec<f64>, names: Arc<[String]>) -> Result<Self> {
        let t = vec![Transform::Identity; lower.len()];
        Self::new(lower, upper, t, names)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn transforms(&self) -> &[Transform] {
        &self.transforms
    }

    /// Width of each box side in transformed space.
    pub fn ranges(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .collect()
    }

    pub fn volume(&self) -> f64 {
        self.log_volume.exp()
    }

    /// Maps natural-scale values to transformed space. Returns `None` when a
    /// log transform meets a nonpositive value.
    pub fn to_transformed(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(theta.len());
        for (i, (&x, tr)) in theta.iter().zip(&self.transforms).enumerate() {
            let t = match *tr {
                Transform::Identity => x,
                Transform::Log => {
                    if x <= 0.0 {
                        return None;
                    }
                    x.ln()
                }
                Transform::ShiftBy { of } => x - theta[of],
            };
            debug_assert!(i == out.len());
            out.push(t);
        }
        Some(out)
    }

    pub fn from_transformed(&self, t: &[f64]) -> Vec<f64> {
        let mut theta = Vec::with_capacity(t.len());
        for (&ti, tr) in t.iter().zip(&self.transforms) {
            let x = match *tr {
                Transform::Identity => ti,
                Transform::Log => ti.exp(),
                Transform::ShiftBy { of } => ti + theta[of],
            };
            theta.push(x);
        }
        theta
    }

    fn in_box(&self, t: &[f64]) -> bool {
        t.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&x, (&l, &u))| x >= l && x <= u)
    }

    /// Density in transformed space: `1/volume` inside the support, 0 outside.
    pub fn density(&self, theta: &ParamVector) -> Result<f64> {
        self.check_dim(theta)?;
        Ok(self.density_unchecked(theta.values()))
    }

    pub(crate) fn density_unchecked(&self, theta: &[f64]) -> f64 {
        match self.to_transformed(theta) {
            Some(t) => self.density_transformed(&t),
            None => 0.0,
        }
    }

    pub fn density_transformed(&self, t: &[f64]) -> f64 {
        if self.in_box(t) {
            (-self.log_volume).exp()
        } else {
            0.0
        }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        self.to_transformed(theta).is_some_and(|t| self.in_box(&t))
    }

    pub fn sample(&self, rng: &mut SimRng) -> ParamVector {
        let t: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| l + (u - l) * rng.random::<f64>())
            .collect();
        ParamVector::new(self.from_transformed(&t), self.names.clone())
            .expect("box draws are finite")
    }

    /// Whether `other` uses the same parameterisation, so that density
    /// ratios between the two are meaningful.
    pub fn same_parameterisation(&self, other: &Prior) -> bool {
        self.transforms == other.transforms && self.dim() == other.dim()
    }

    fn check_dim(&self, theta: &ParamVector) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(AbcError::usage(format!(
                "parameter has dimension {} but the prior has dimension {}",
                theta.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `pi(theta)` for `theta` of matching dimension.
pub fn prior_density(prior: &Prior, theta: &ParamVector) -> Result<f64> {
    prior.density(theta)
}

pub fn prior_sample(prior: &Prior, rng: &mut SimRng) -> ParamVector {
    prior.sample(rng)
}
