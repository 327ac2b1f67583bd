//! M/G/1 queue observed through interdeparture times.
//!
//! Customer `i` arrives at `v_i = v_{i-1} + w_i`, `w_i ~ Exp(theta3)`, needs
//! service `u_i ~ U[theta1, theta2]` and departs at `x_i = x_{i-1} + y_i`,
//! `y_i = u_i + max(0, v_i - x_{i-1})`. Waiting time (queue plus service)
//! is `x_i - v_i`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::{index_times, missing, SimRequest, Simulator};
use crate::error::{AbcError, Result};
use crate::rng::SimRng;
use crate::types::{SimOutput, SimulatorCapabilities, TimeSeriesData};

#[derive(Debug, Clone)]
pub struct Mg1Model {
    pub n: usize,
    pub n_future: usize,
}

/// Queue state after a customer departs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueState {
    /// Departure time of the last customer.
    pub x: f64,
    /// Arrival time of the last customer.
    pub v: f64,
}

/// One customer: interdeparture time, arrival time, waiting time.
#[derive(Debug, Clone, Copy)]
pub struct Customer {
    pub y: f64,
    pub v: f64,
    pub waiting: f64,
}

impl Mg1Model {
    pub fn new(n: usize, n_future: usize) -> Result<Self> {
        if n == 0 || n_future == 0 {
            return Err(AbcError::usage(
                "queue model needs n >= 1 and n_future >= 1",
            ));
        }
        Ok(Self { n, n_future })
    }

    fn valid(theta: &[f64]) -> bool {
        theta[0] >= 0.0 && theta[1] >= theta[0] && theta[2] > 0.0
    }

    /// Serves `count` customers starting from `state`.
    pub fn serve(
        theta: &[f64],
        mut state: QueueState,
        count: usize,
        rng: &mut SimRng,
    ) -> Vec<Customer> {
        let exp = Exp::new(theta[2]).expect("positive arrival rate");
        let (lo, hi) = (theta[0], theta[1]);
        (0..count)
            .map(|_| {
                let w = exp.sample(rng);
                let u = lo + (hi - lo) * rng.random::<f64>();
                state.v += w;
                let y = u + (state.v - state.x).max(0.0);
                state.x += y;
                Customer {
                    y,
                    v: state.v,
                    waiting: state.x - state.v,
                }
            })
            .collect()
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != 3 || !Self::valid(theta) {
            return Err(AbcError::usage(format!(
                "queue parameters must satisfy 0 <= theta1 <= theta2 and theta3 > 0, got {theta:?}"
            )));
        }
        Ok(())
    }
}

impl Simulator for Mg1Model {
    fn name(&self) -> &str {
        "mg1"
    }

    fn param_names(&self) -> Arc<[String]> {
        Arc::from(vec![
            "theta1".to_string(),
            "theta2".to_string(),
            "theta3".to_string(),
        ])
    }

    fn capabilities(&self) -> SimulatorCapabilities {
        SimulatorCapabilities {
            joint: true,
            conditional: false,
            latent_joint: true,
            latent_conditional: true,
        }
    }

    /// Every interdeparture time is at least `theta1`, so `theta1` above the
    /// smallest observed value has zero likelihood.
    fn admissible(&self, theta: &[f64], observed: &TimeSeriesData) -> bool {
        let min = observed
            .values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        Self::valid(theta) && theta[0] <= min
    }

    fn simulate(&self, theta: &[f64], request: SimRequest, rng: &mut SimRng) -> Result<SimOutput> {
        self.check(theta)?;
        let start = QueueState { x: 0.0, v: 0.0 };
        let cs = Self::serve(theta, start, self.n, rng);
        let last = cs[self.n - 1];
        let state = QueueState {
            x: cs.iter().map(|c| c.y).sum(),
            v: last.v,
        };
        let ys: Vec<f64> = cs.iter().map(|c| c.y).collect();
        let latents: Vec<f64> = cs.iter().flat_map(|c| [c.v, c.waiting]).collect();
        let observed = TimeSeriesData::from_parts(index_times(1, self.n), 1, ys)
            .with_latents(2, latents)
            .expect("latent track matches");
        let future = match request {
            SimRequest::Joint => Some(self.waiting_series(theta, state, rng)),
            _ => None,
        };
        Ok(SimOutput {
            observed,
            future,
            latent_state: Some(vec![state.x, state.v]),
            truncated: false,
        })
    }

    /// `(x_n, v_n)`: departure time from the data, arrival time from `latent`.
    fn carry_state(&self, data: &TimeSeriesData, latent: Option<&[f64]>) -> Result<Vec<f64>> {
        let v = match latent {
            Some(l) if l.len() == 2 => l[1],
            _ => return Err(missing(self.name(), "conditional")),
        };
        let x: f64 = data.values().iter().sum();
        Ok(vec![x, v])
    }

    fn simulate_future(
        &self,
        theta: &[f64],
        carry: &[f64],
        rng: &mut SimRng,
    ) -> Result<TimeSeriesData> {
        self.check(theta)?;
        let state = QueueState {
            x: carry[0],
            v: carry[1],
        };
        Ok(self.waiting_series(theta, state, rng))
    }

    fn future_times(&self) -> Vec<f64> {
        index_times(self.n + 1, self.n + self.n_future)
    }

    fn future_labels(&self) -> Vec<String> {
        vec!["waiting".into()]
    }
}

impl Mg1Model {
    fn waiting_series(&self, theta: &[f64], state: QueueState, rng: &mut SimRng) -> TimeSeriesData {
        let w = Self::serve(theta, state, self.n_future, rng)
            .iter()
            .map(|c| c.waiting)
            .collect();
        TimeSeriesData::from_parts(self.future_times(), 1, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::stats;

    #[test]
    fn first_customer_waits_only_for_service() {
        let m = Mg1Model::new(5, 1).unwrap();
        let theta = [4.0, 7.0, 0.15];
        for s in 0..100 {
            let out = m
                .simulate(&theta, SimRequest::Observed, &mut seeded(s))
                .unwrap();
            let lat = out.observed.latents().unwrap();
            let y1 = out.observed.values()[0];
            // y_1 = v_1 + u_1 so the first waiting time is y_1 - v_1 = u_1.
            assert!((lat[1] - (y1 - lat[0])).abs() < 1e-12);
            assert!((4.0..=7.0).contains(&lat[1]));
        }
    }

    #[test]
    fn recursion_identities() {
        let m = Mg1Model::new(200, 1).unwrap();
        let theta = [1.0, 5.0, 0.3];
        let out = m
            .simulate(&theta, SimRequest::LatentJoint, &mut seeded(7))
            .unwrap();
        let lat = out.observed.latents().unwrap();
        let mut x = 0.0;
        let mut prev_v = 0.0;
        for (i, &y) in out.observed.values().iter().enumerate() {
            x += y;
            let v = lat[2 * i];
            assert!(v > prev_v);
            assert!(x >= v);
            assert!(lat[2 * i + 1] >= theta[0]);
            prev_v = v;
        }
        let st = out.latent_state.unwrap();
        assert!((st[0] - x).abs() < 1e-9);
    }

    #[test]
    fn instant_arrivals_give_uniform_service() {
        let m = Mg1Model::new(50, 1).unwrap();
        let theta = [2.0, 3.0, 1e9];
        let out = m
            .simulate(&theta, SimRequest::Observed, &mut seeded(3))
            .unwrap();
        let ys = out.observed.values();
        assert!(ys.iter().all(|&y| (2.0..=3.0 + 1e-6).contains(&y)));
        assert!((stats::mean(ys) - 2.5).abs() < 0.2);
    }

    #[test]
    fn constraint_blocks_large_theta1() {
        let m = Mg1Model::new(3, 1).unwrap();
        let d = TimeSeriesData::scalar(vec![1.0, 2.0, 3.0], vec![5.0, 4.0, 6.0]).unwrap();
        assert!(m.admissible(&[3.9, 5.0, 0.1], &d));
        assert!(!m.admissible(&[4.1, 5.0, 0.1], &d));
    }
}
