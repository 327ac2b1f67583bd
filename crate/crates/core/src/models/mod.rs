//! Simulator models and the interface the samplers drive them through.

use std::sync::Arc;

use crate::error::{AbcError, Result};
use crate::rng::SimRng;
use crate::types::{SimOutput, SimulatorCapabilities, TimeSeriesData};

pub mod lotka_volterra;
pub mod markov;
pub mod mg1;
pub mod ssm;

pub use lotka_volterra::{LotkaVolterraModel, LvTask};
pub use markov::GaussianMarkovModel;
pub use mg1::Mg1Model;
pub use ssm::LinearGaussianSsm;

/// What a single forward simulation must return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimRequest {
    /// Pseudo-data `z` only.
    Observed,
    /// `(z, z~)` jointly.
    Joint,
    /// `(z, v)`: pseudo-data plus the latent variables that make future
    /// simulation conditionally tractable.
    LatentJoint,
}

/// A likelihood-free model: forward simulation is the only access to it.
///
/// Predictions are continued from a *carry state*, the minimal information
/// that renders the future conditionally independent of the past given
/// `theta`. It is built from data (observed or simulated) and, for models
/// with latent structure, a latent vector.
pub trait Simulator: Send + Sync {
    fn name(&self) -> &str;

    fn param_names(&self) -> Arc<[String]>;

    fn capabilities(&self) -> SimulatorCapabilities;

    /// Hard constraints linking `theta` and the observed data. Proposals that
    /// fail are rejected without simulating.
    fn admissible(&self, _theta: &[f64], _observed: &TimeSeriesData) -> bool {
        true
    }

    fn simulate(&self, theta: &[f64], request: SimRequest, rng: &mut SimRng) -> Result<SimOutput>;

    /// Conditioning state for future simulation. `latent` is required when
    /// the model only declares `latent_conditional`.
    fn carry_state(&self, data: &TimeSeriesData, latent: Option<&[f64]>) -> Result<Vec<f64>>;

    /// Draws `z~ | carry, theta` at [`Simulator::future_times`].
    fn simulate_future(
        &self,
        theta: &[f64],
        carry: &[f64],
        rng: &mut SimRng,
    ) -> Result<TimeSeriesData>;

    /// Inputs (times or customer indices) of the predicted quantities.
    fn future_times(&self) -> Vec<f64>;

    /// Column labels of one predicted record.
    fn future_labels(&self) -> Vec<String> {
        vec!["y".into()]
    }
}

pub(crate) fn missing(model: &str, capability: &'static str) -> AbcError {
    AbcError::MissingCapability {
        model: model.to_string(),
        capability,
    }
}

/// Checks a model's declared capabilities; call when registering a model.
pub fn register(model: &dyn Simulator) -> Result<()> {
    model.capabilities().validate()
}

/// `1, 2, ..., n` as floats.
pub(crate) fn index_times(from: usize, to: usize) -> Vec<f64> {
    (from..=to).map(|i| i as f64).collect()
}
