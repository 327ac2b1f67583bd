//! Linear-Gaussian state-space model with unknown intercept `c`:
//! `v_t = c + phi v_{t-1} + N(0, sigma2)`, `y_t = v_t + N(0, omega2)`, `v_0 = 0`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{index_times, missing, SimRequest, Simulator};
use crate::error::{AbcError, Result};
use crate::rng::SimRng;
use crate::types::{SimOutput, SimulatorCapabilities, TimeSeriesData};

#[derive(Debug, Clone)]
pub struct LinearGaussianSsm {
    pub phi: f64,
    pub sigma2: f64,
    pub omega2: f64,
    pub n: usize,
    pub horizon: usize,
}

impl LinearGaussianSsm {
    pub fn new(phi: f64, sigma2: f64, omega2: f64, n: usize, horizon: usize) -> Result<Self> {
        if !(omega2 > 0.0 && sigma2 >= 0.0 && phi.is_finite()) {
            return Err(AbcError::usage(
                "state-space model needs omega2 > 0 and sigma2 >= 0",
            ));
        }
        if n == 0 || horizon == 0 {
            return Err(AbcError::usage(
                "state-space model needs n >= 1 and horizon >= 1",
            ));
        }
        Ok(Self {
            phi,
            sigma2,
            omega2,
            n,
            horizon,
        })
    }

    /// Latent and observed values for `steps` steps after latent `start`.
    fn run(&self, c: f64, start: f64, steps: usize, rng: &mut SimRng) -> (Vec<f64>, Vec<f64>) {
        let (sd, od) = (self.sigma2.sqrt(), self.omega2.sqrt());
        let mut v = start;
        let mut vs = Vec::with_capacity(steps);
        let mut ys = Vec::with_capacity(steps);
        for _ in 0..steps {
            let e: f64 = rng.sample(StandardNormal);
            let u: f64 = rng.sample(StandardNormal);
            v = c + self.phi * v + sd * e;
            vs.push(v);
            ys.push(v + od * u);
        }
        (vs, ys)
    }
}

impl Simulator for LinearGaussianSsm {
    fn name(&self) -> &str {
        "ssm"
    }

    fn param_names(&self) -> Arc<[String]> {
        Arc::from(vec!["c".to_string()])
    }

    fn capabilities(&self) -> SimulatorCapabilities {
        SimulatorCapabilities {
            joint: true,
            conditional: false,
            latent_joint: true,
            latent_conditional: true,
        }
    }

    fn simulate(&self, theta: &[f64], request: SimRequest, rng: &mut SimRng) -> Result<SimOutput> {
        let c = theta[0];
        let (vs, ys) = self.run(c, 0.0, self.n, rng);
        let vn = vs[self.n - 1];
        let observed = TimeSeriesData::from_parts(index_times(1, self.n), 1, ys)
            .with_latents(1, vs)
            .expect("latent track matches");
        let future = match request {
            SimRequest::Joint => {
                let (_, f) = self.run(c, vn, self.horizon, rng);
                Some(TimeSeriesData::from_parts(self.future_times(), 1, f))
            }
            _ => None,
        };
        Ok(SimOutput {
            observed,
            future,
            latent_state: Some(vec![vn]),
            truncated: false,
        })
    }

    fn carry_state(&self, _data: &TimeSeriesData, latent: Option<&[f64]>) -> Result<Vec<f64>> {
        match latent {
            Some(v) if !v.is_empty() => Ok(vec![v[0]]),
            _ => Err(missing(self.name(), "conditional")),
        }
    }

    fn simulate_future(
        &self,
        theta: &[f64],
        carry: &[f64],
        rng: &mut SimRng,
    ) -> Result<TimeSeriesData> {
        let (_, f) = self.run(theta[0], carry[0], self.horizon, rng);
        Ok(TimeSeriesData::from_parts(self.future_times(), 1, f))
    }

    fn future_times(&self) -> Vec<f64> {
        index_times(self.n + 1, self.n + self.horizon)
    }
}
