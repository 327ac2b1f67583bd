//! Domain types shared by every module.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{AbcError, Result};

/// A point in parameter space with named components.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
    names: Arc<[String]>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>, names: Arc<[String]>) -> Result<Self> {
        if values.len() != names.len() {
            return Err(AbcError::usage(format!(
                "parameter vector has {} values but {} names",
                values.len(),
                names.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(AbcError::usage(format!(
                "parameter '{}' is not finite ({})",
                names[i], values[i]
            )));
        }
        Ok(Self { values, names })
    }

    /// Builds a vector with generated names `theta1..thetap`.
    pub fn unnamed(values: Vec<f64>) -> Result<Self> {
        let names = default_names(values.len());
        Self::new(values, names)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

pub fn default_names(p: usize) -> Arc<[String]> {
    (1..=p).map(|i| format!("theta{i}")).collect()
}

/// Ordered observation records, optionally with a latent track.
///
/// Values are stored row-major: record `i` occupies
/// `values[i * width..(i + 1) * width]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesData {
    times: Vec<f64>,
    width: usize,
    values: Vec<f64>,
    latent_width: usize,
    latents: Option<Vec<f64>>,
}

impl TimeSeriesData {
    pub fn new(times: Vec<f64>, width: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 {
            return Err(AbcError::usage("record width must be positive"));
        }
        if values.len() != times.len() * width {
            return Err(AbcError::usage(format!(
                "{} values do not form {} records of width {width}",
                values.len(),
                times.len()
            )));
        }
        if let Some(w) = times.windows(2).position(|w| w[1] <= w[0] || w[1].is_nan()) {
            return Err(AbcError::usage(format!(
                "times must be strictly increasing (index {})",
                w + 1
            )));
        }
        Ok(Self {
            times,
            width,
            values,
            latent_width: 0,
            latents: None,
        })
    }

    /// Unchecked constructor for simulator hot paths where the invariants
    /// hold by construction.
    pub(crate) fn from_parts(times: Vec<f64>, width: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), times.len() * width);
        Self {
            times,
            width,
            values,
            latent_width: 0,
            latents: None,
        }
    }

    /// Scalar series at the given times.
    pub fn scalar(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(times, 1, values)
    }

    pub fn with_latents(mut self, latent_width: usize, latents: Vec<f64>) -> Result<Self> {
        if latent_width == 0 || latents.len() != self.times.len() * latent_width {
            return Err(AbcError::usage(format!(
                "latent track must have exactly {} records",
                self.times.len()
            )));
        }
        self.latent_width = latent_width;
        self.latents = Some(latents);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn record(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn last_record(&self) -> Option<&[f64]> {
        (!self.is_empty()).then(|| self.record(self.len() - 1))
    }

    /// Column `c` as an owned series.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(c)
            .step_by(self.width)
            .copied()
            .collect()
    }

    pub fn latent_width(&self) -> usize {
        self.latent_width
    }

    pub fn latents(&self) -> Option<&[f64]> {
        self.latents.as_deref()
    }

    /// Keeps only the listed columns.
    pub fn project(&self, columns: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.len() * columns.len());
        for i in 0..self.len() {
            let r = self.record(i);
            values.extend(columns.iter().map(|&c| r[c]));
        }
        Self::from_parts(self.times.clone(), columns.len(), values)
    }
}

/// One draw from a simulator.
#[derive(Debug, Clone)]
pub struct SimOutput {
    /// Pseudo-data `z` at the observation inputs.
    pub observed: TimeSeriesData,
    /// Future or missing pseudo-data `z~`.
    pub future: Option<TimeSeriesData>,
    /// Latent variables `v` needed for conditional prediction.
    pub latent_state: Option<Vec<f64>>,
    /// Set when the simulator hit a safety cap; such outputs are rejected.
    pub truncated: bool,
}

/// Which predictive densities a model can sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulatorCapabilities {
    /// `(z, z~) | theta`
    pub joint: bool,
    /// `z~ | y, theta`
    pub conditional: bool,
    /// `(z, v) | theta`
    pub latent_joint: bool,
    /// `z~ | y, v, theta`
    pub latent_conditional: bool,
}

impl SimulatorCapabilities {
    /// Checks the implication `conditional => latent_conditional`
    /// (conditioning on an empty latent set).
    pub fn validate(&self) -> Result<()> {
        if self.conditional && !self.latent_conditional {
            return Err(AbcError::Invariant(
                "a model that samples z~ | y, theta must also declare latent_conditional".into(),
            ));
        }
        Ok(())
    }
}

/// One sampler output.
#[derive(Debug, Clone)]
pub struct WeightedDraw {
    pub theta: ParamVector,
    pub prediction: Option<TimeSeriesData>,
    /// Latent variables `v` simulated alongside `z`.
    pub latent: Option<Vec<f64>>,
    /// Conditioning state extracted from the simulated `z` (and `v`), used to
    /// fill in predictions after the fact.
    pub carry: Option<Vec<f64>>,
    /// Summary `s_z` of the simulated pseudo-data.
    pub summary: Vec<f64>,
    /// Nonnegative weight; 1 for accepted rejection/MCMC states.
    pub weight: f64,
    /// Number of consecutive chain iterations spent in this state.
    pub multiplicity: u64,
    /// One discrepancy per acceptance-region component.
    pub raw_discrepancy: Vec<f64>,
}

impl WeightedDraw {
    /// Weight times multiplicity: the mass this draw carries in estimates.
    pub fn mass(&self) -> f64 {
        self.weight * self.multiplicity as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing_times() {
        assert!(TimeSeriesData::scalar(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(TimeSeriesData::scalar(vec![1.0, 2.0], vec![0.0, 0.0]).is_ok());
    }

    #[test]
    fn rejects_ragged_records() {
        assert!(TimeSeriesData::new(vec![1.0, 2.0], 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn latent_track_length_checked() {
        let d = TimeSeriesData::scalar(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert!(d.clone().with_latents(1, vec![1.0]).is_err());
        assert!(d.with_latents(1, vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn param_vector_rejects_nan() {
        assert!(ParamVector::unnamed(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn capability_implication() {
        let bad = SimulatorCapabilities {
            joint: true,
            conditional: true,
            latent_joint: false,
            latent_conditional: false,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn project_and_component() {
        let d = TimeSeriesData::new(vec![0.0, 1.0], 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.component(1), vec![2.0, 4.0]);
        assert_eq!(d.project(&[0]).values(), &[1.0, 3.0]);
    }
}
