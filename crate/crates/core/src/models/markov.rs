//! Gaussian AR(1) chain with unknown intercept `c`:
//! `y_t = c + phi y_{t-1} + e_t`, `e_t ~ N(0, sigma2)`, `y_0 = 0`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{index_times, SimRequest, Simulator};
use crate::error::{AbcError, Result};
use crate::rng::SimRng;
use crate::types::{SimOutput, SimulatorCapabilities, TimeSeriesData};

#[derive(Debug, Clone)]
pub struct GaussianMarkovModel {
    pub phi: f64,
    pub sigma2: f64,
    pub n: usize,
    /// Number of steps ahead to predict (`y_{n+1}..y_{n+horizon}`).
    pub horizon: usize,
    pub y0: f64,
}

impl GaussianMarkovModel {
    pub fn new(phi: f64, sigma2: f64, n: usize, horizon: usize) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite() && phi.is_finite()) {
            return Err(AbcError::usage(
                "markov model needs finite phi and sigma2 >= 0",
            ));
        }
        if n == 0 || horizon == 0 {
            return Err(AbcError::usage(
                "markov model needs n >= 1 and horizon >= 1",
            ));
        }
        Ok(Self {
            phi,
            sigma2,
            n,
            horizon,
            y0: 0.0,
        })
    }

    /// Continues the recursion for `steps` values starting after `start`.
    pub fn path_from(&self, c: f64, start: f64, steps: usize, rng: &mut SimRng) -> Vec<f64> {
        let sd = self.sigma2.sqrt();
        let mut y = start;
        (0..steps)
            .map(|_| {
                let e: f64 = rng.sample(StandardNormal);
                y = c + self.phi * y + sd * e;
                y
            })
            .collect()
    }
}

impl Simulator for GaussianMarkovModel {
    fn name(&self) -> &str {
        "markov"
    }

    fn param_names(&self) -> Arc<[String]> {
        Arc::from(vec!["c".to_string()])
    }

    fn capabilities(&self) -> SimulatorCapabilities {
        SimulatorCapabilities {
            joint: true,
            conditional: true,
            latent_joint: true,
            latent_conditional: true,
        }
    }

    fn simulate(&self, theta: &[f64], request: SimRequest, rng: &mut SimRng) -> Result<SimOutput> {
        let c = theta[0];
        let z = self.path_from(c, self.y0, self.n, rng);
        let last = z[self.n - 1];
        let observed = TimeSeriesData::from_parts(index_times(1, self.n), 1, z);
        let future = match request {
            SimRequest::Joint => {
                let f = self.path_from(c, last, self.horizon, rng);
                Some(TimeSeriesData::from_parts(self.future_times(), 1, f))
            }
            _ => None,
        };
        // The chain is Markov in y itself, so the latent set is empty.
        let latent_state = matches!(request, SimRequest::LatentJoint).then(Vec::new);
        Ok(SimOutput {
            observed,
            future,
            latent_state,
            truncated: false,
        })
    }

    fn carry_state(&self, data: &TimeSeriesData, _latent: Option<&[f64]>) -> Result<Vec<f64>> {
        data.last_record()
            .map(|r| vec![r[0]])
            .ok_or_else(|| AbcError::usage("cannot predict from empty data"))
    }

    fn simulate_future(
        &self,
        theta: &[f64],
        carry: &[f64],
        rng: &mut SimRng,
    ) -> Result<TimeSeriesData> {
        let f = self.path_from(theta[0], carry[0], self.horizon, rng);
        Ok(TimeSeriesData::from_parts(self.future_times(), 1, f))
    }

    fn future_times(&self) -> Vec<f64> {
        index_times(self.n + 1, self.n + self.horizon)
    }
}
