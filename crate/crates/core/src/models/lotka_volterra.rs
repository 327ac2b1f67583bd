//! Stochastic Lotka-Volterra predator-prey jump process, simulated exactly
//! with the Gillespie algorithm.
//!
//! From state `(z1, z2)` (prey, predators) the jumps are prey birth at rate
//! `theta1 z1`, predation `(z1 - 1, z2 + 1)` at rate `theta2 z1 z2` and
//! predator death at rate `theta3 z2`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1, Gamma, Poisson};

use super::{missing, SimRequest, Simulator};
use crate::error::{AbcError, Result};
use crate::rng::SimRng;
use crate::types::{SimOutput, SimulatorCapabilities, TimeSeriesData};

pub const DEFAULT_EVENT_CAP: u64 = 10_000_000;
pub const DEFAULT_POPULATION_CAP: u64 = 1_000_000;
pub const GRID_STEP: f64 = 0.3;

/// Observation and prediction geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvTask {
    /// Both populations observed on `[0, 24]`, predicted on `(24, 45]`.
    Case1,
    /// Prey observed on `[0, 24]`; predators at `24` are the latent variable.
    Case2,
    /// Both populations observed on `[0, 15]` and `[36, 51]`; the gap is
    /// predicted.
    Missing,
}

/// Jump kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvEvent {
    PreyBirth,
    Predation,
    PredatorDeath,
}

#[derive(Debug, Clone)]
pub struct LotkaVolterraModel {
    pub task: LvTask,
    pub y0: [u64; 2],
    pub event_cap: u64,
    pub population_cap: u64,
    obs_times: Vec<f64>,
    future_times: Vec<f64>,
}

/// Grid `k * 0.3` for `k` in `from..=to`.
fn grid(from: u32, to: u32) -> Vec<f64> {
    (from..=to).map(|k| f64::from(k) * GRID_STEP).collect()
}

/// Replaces recorded values of populations that passed the cap by infinity
/// from the truncation point on.
fn mark_exploded(path: &mut LvPath) {
    if let Some(from) = path.truncated_at {
        for (i, v) in path.values.iter_mut().enumerate().skip(2 * from) {
            if path.exploded[i % 2] {
                *v = f64::INFINITY;
            }
        }
    }
}

/// Result of a path simulation recorded on a grid.
#[derive(Debug, Clone)]
pub struct LvPath {
    /// Row-major `(prey, predators)` per grid time.
    pub values: Vec<f64>,
    pub truncated: bool,
    /// First grid index recorded after a cap was hit; later values are
    /// frozen at the capped state.
    pub truncated_at: Option<usize>,
    /// Which populations passed the cap (both false for the event cap).
    pub exploded: [bool; 2],
    pub events: u64,
}

impl LotkaVolterraModel {
    pub fn new(task: LvTask, y0: [u64; 2]) -> Self {
        let (obs_times, future_times) = match task {
            LvTask::Case1 | LvTask::Case2 => (grid(0, 80), grid(81, 150)),
            LvTask::Missing => {
                let mut o = grid(0, 50);
                o.extend(grid(120, 170));
                (o, grid(51, 119))
            }
        };
        Self {
            task,
            y0,
            event_cap: DEFAULT_EVENT_CAP,
            population_cap: DEFAULT_POPULATION_CAP,
            obs_times,
            future_times,
        }
    }

    pub fn obs_times(&self) -> &[f64] {
        &self.obs_times
    }

    /// Time of the last observation before the prediction window.
    pub fn t1(&self) -> f64 {
        match self.task {
            LvTask::Case1 | LvTask::Case2 => 24.0,
            LvTask::Missing => f64::from(50u32) * GRID_STEP,
        }
    }

    /// Total jump rate and the next event from `state`.
    pub fn rates(theta: &[f64], z: [u64; 2]) -> [f64; 3] {
        let (a, b) = (z[0] as f64, z[1] as f64);
        [theta[0] * a, theta[1] * a * b, theta[2] * b]
    }

    /// One Gillespie step: waiting time and event. `None` when absorbed.
    pub fn step(theta: &[f64], z: [u64; 2], rng: &mut SimRng) -> Option<(f64, LvEvent)> {
        let r = Self::rates(theta, z);
        let total = r[0] + r[1] + r[2];
        if total <= 0.0 {
            return None;
        }
        let e: f64 = rng.sample(Exp1);
        let dt = e / total;
        let u = rng.random::<f64>() * total;
        let ev = if u < r[0] {
            LvEvent::PreyBirth
        } else if u < r[0] + r[1] {
            LvEvent::Predation
        } else {
            LvEvent::PredatorDeath
        };
        Some((dt, ev))
    }

    fn apply(z: &mut [u64; 2], ev: LvEvent) {
        match ev {
            LvEvent::PreyBirth => z[0] += 1,
            LvEvent::Predation => {
                z[0] -= 1;
                z[1] += 1;
            }
            LvEvent::PredatorDeath => z[1] -= 1,
        }
    }

    /// Simulates from `start` at time `t0`, recording the state in force at
    /// each of `times` (all `>= t0`, increasing).
    pub fn simulate_from(
        &self,
        theta: &[f64],
        start: [u64; 2],
        t0: f64,
        times: &[f64],
        rng: &mut SimRng,
    ) -> LvPath {
        let mut values = Vec::with_capacity(2 * times.len());
        let mut z = start;
        let mut t = t0;
        let mut idx = 0;
        let mut events: u64 = 0;
        let mut truncated = false;
        let mut truncated_at = None;
        let mut exploded = [false; 2];
        let record = |values: &mut Vec<f64>, z: [u64; 2]| {
            values.push(z[0] as f64);
            values.push(z[1] as f64);
        };
        while idx < times.len() {
            if z[1] == 0 && z[0] > 0 {
                // Predators extinct: prey is a Yule process, and the number of
                // births over an interval is negative binomial.
                truncated = self.pure_birth(
                    theta[0],
                    &mut z,
                    &mut t,
                    times,
                    &mut idx,
                    &mut values,
                    &mut events,
                    rng,
                );
                if truncated {
                    truncated_at = Some(idx);
                    exploded = [true, false];
                }
                break;
            }
            if z[0] == 0 && z[1] > 0 {
                // Prey extinct: predators die independently.
                self.pure_death(
                    theta[2],
                    &mut z,
                    &mut t,
                    times,
                    &mut idx,
                    &mut values,
                    &mut events,
                    rng,
                );
                break;
            }
            match Self::step(theta, z, rng) {
                None => break,
                Some((dt, ev)) => {
                    let t_next = t + dt;
                    while idx < times.len() && times[idx] < t_next {
                        record(&mut values, z);
                        idx += 1;
                    }
                    if idx == times.len() {
                        break;
                    }
                    Self::apply(&mut z, ev);
                    t = t_next;
                    events += 1;
                    if events >= self.event_cap
                        || z[0] > self.population_cap
                        || z[1] > self.population_cap
                    {
                        truncated = true;
                        truncated_at = Some(idx);
                        exploded = [z[0] > self.population_cap, z[1] > self.population_cap];
                        break;
                    }
                }
            }
        }
        while idx < times.len() {
            record(&mut values, z);
            idx += 1;
        }
        LvPath {
            values,
            truncated,
            truncated_at,
            exploded,
            events,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn pure_birth(
        &self,
        rate: f64,
        z: &mut [u64; 2],
        t: &mut f64,
        times: &[f64],
        idx: &mut usize,
        values: &mut Vec<f64>,
        events: &mut u64,
        rng: &mut SimRng,
    ) -> bool {
        // Returns whether a cap was hit.
        while *idx < times.len() {
            let dt = times[*idx] - *t;
            if dt > 0.0 && rate > 0.0 {
                let p = (-rate * dt).exp();
                let k = z[0] as f64;
                let lambda = Gamma::new(k, (1.0 - p) / p)
                    .map(|g| g.sample(rng))
                    .unwrap_or(f64::INFINITY);
                if !(lambda < 1e15) {
                    return true;
                }
                let births = if lambda > 0.0 {
                    Poisson::new(lambda)
                        .map(|d| d.sample(rng))
                        .unwrap_or(f64::INFINITY)
                } else {
                    0.0
                };
                if !births.is_finite() {
                    return true;
                }
                let births = births as u64;
                z[0] += births;
                *events += births;
                *t = times[*idx];
                if *events >= self.event_cap || z[0] > self.population_cap {
                    return true;
                }
            }
            values.push(z[0] as f64);
            values.push(z[1] as f64);
            *idx += 1;
        }
        false
    }

    #[allow(clippy::too_many_arguments)]
    fn pure_death(
        &self,
        rate: f64,
        z: &mut [u64; 2],
        t: &mut f64,
        times: &[f64],
        idx: &mut usize,
        values: &mut Vec<f64>,
        events: &mut u64,
        rng: &mut SimRng,
    ) {
        while *idx < times.len() {
            let dt = times[*idx] - *t;
            if dt > 0.0 && z[1] > 0 {
                let p = (-rate * dt).exp();
                let survivors = Binomial::new(z[1], p)
                    .expect("valid probability")
                    .sample(rng);
                *events += z[1] - survivors;
                z[1] = survivors;
                *t = times[*idx];
            }
            values.push(z[0] as f64);
            values.push(z[1] as f64);
            *idx += 1;
        }
    }

    fn check(theta: &[f64]) -> Result<()> {
        if theta.len() != 3 || theta.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(AbcError::usage(format!(
                "Lotka-Volterra rates must be positive, got {theta:?}"
            )));
        }
        Ok(())
    }

    fn observed_from(&self, full: &[f64]) -> TimeSeriesData {
        let n = self.obs_times.len();
        match self.task {
            LvTask::Case2 => {
                let prey = (0..n).map(|i| full[2 * i]).collect();
                let pred = (0..n).map(|i| full[2 * i + 1]).collect();
                TimeSeriesData::from_parts(self.obs_times.clone(), 1, prey)
                    .with_latents(1, pred)
                    .expect("latent track matches")
            }
            _ => TimeSeriesData::from_parts(self.obs_times.clone(), 2, full.to_vec()),
        }
    }

    fn start_state(carry: &[f64]) -> Result<[u64; 2]> {
        if carry.len() != 2 || carry.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
            return Err(AbcError::usage(format!(
                "population state must be two nonnegative integers, got {carry:?}"
            )));
        }
        Ok([carry[0] as u64, carry[1] as u64])
    }
}

impl Simulator for LotkaVolterraModel {
    fn name(&self) -> &str {
        match self.task {
            LvTask::Case1 => "lv.case1",
            LvTask::Case2 => "lv.case2",
            LvTask::Missing => "lv.missing",
        }
    }

    fn param_names(&self) -> Arc<[String]> {
        Arc::from(vec![
            "theta1".to_string(),
            "theta2".to_string(),
            "theta3".to_string(),
        ])
    }

    fn capabilities(&self) -> SimulatorCapabilities {
        match self.task {
            // Fully observed Markov state: conditioning on y_T1 is conditioning
            // on an empty latent set, so latent paths are available too.
            LvTask::Case1 => SimulatorCapabilities {
                joint: true,
                conditional: true,
                latent_joint: true,
                latent_conditional: true,
            },
            LvTask::Case2 => SimulatorCapabilities {
                joint: true,
                conditional: false,
                latent_joint: true,
                latent_conditional: true,
            },
            LvTask::Missing => SimulatorCapabilities {
                joint: true,
                conditional: false,
                latent_joint: false,
                latent_conditional: false,
            },
        }
    }

    fn simulate(&self, theta: &[f64], request: SimRequest, rng: &mut SimRng) -> Result<SimOutput> {
        Self::check(theta)?;
        if request == SimRequest::LatentJoint && !self.capabilities().latent_joint {
            return Err(missing(self.name(), "latent_joint"));
        }
        let want_future = request == SimRequest::Joint;
        let n_obs = self.obs_times.len();
        let (observed, future, truncated) = match (self.task, want_future) {
            (LvTask::Missing, true) => {
                // Observation blocks surround the gap: simulate on the merged grid.
                let all = grid(0, 170);
                let path = self.simulate_from(theta, self.y0, 0.0, &all, rng);
                let mut obs = Vec::with_capacity(2 * n_obs);
                obs.extend_from_slice(&path.values[..2 * 51]);
                obs.extend_from_slice(&path.values[2 * 120..]);
                let gap = path.values[2 * 51..2 * 120].to_vec();
                (
                    self.observed_from(&obs),
                    Some(TimeSeriesData::from_parts(
                        self.future_times.clone(),
                        2,
                        gap,
                    )),
                    path.truncated,
                )
            }
            (_, true) => {
                let mut all = self.obs_times.clone();
                all.extend_from_slice(&self.future_times);
                let mut path = self.simulate_from(theta, self.y0, 0.0, &all, rng);
                // An explosion after the observation window only affects the
                // prediction, which then reports the population as unbounded.
                let future_only = path.truncated_at.is_some_and(|i| i >= n_obs)
                    && path.exploded.iter().any(|&e| e);
                if future_only {
                    mark_exploded(&mut path);
                }
                let (o, f) = path.values.split_at(2 * n_obs);
                (
                    self.observed_from(o),
                    Some(TimeSeriesData::from_parts(
                        self.future_times.clone(),
                        2,
                        f.to_vec(),
                    )),
                    path.truncated && !future_only,
                )
            }
            (_, false) => {
                let path = self.simulate_from(theta, self.y0, 0.0, &self.obs_times, rng);
                (self.observed_from(&path.values), None, path.truncated)
            }
        };
        let latent_state = match (self.task, request) {
            (LvTask::Case2, SimRequest::LatentJoint) => {
                let pred = observed.latents().expect("case 2 keeps predators");
                Some(vec![pred[n_obs - 1]])
            }
            (LvTask::Case1, SimRequest::LatentJoint) => Some(Vec::new()),
            _ => None,
        };
        Ok(SimOutput {
            observed,
            future,
            latent_state,
            truncated,
        })
    }

    fn carry_state(&self, data: &TimeSeriesData, latent: Option<&[f64]>) -> Result<Vec<f64>> {
        let last = data
            .last_record()
            .ok_or_else(|| AbcError::usage("cannot predict from empty data"))?;
        match self.task {
            LvTask::Case1 => Ok(last.to_vec()),
            LvTask::Case2 => match latent {
                Some(v) if v.len() == 1 => Ok(vec![last[0], v[0]]),
                _ => Err(missing(self.name(), "conditional")),
            },
            LvTask::Missing => Err(missing(self.name(), "latent_conditional")),
        }
    }

    fn simulate_future(
        &self,
        theta: &[f64],
        carry: &[f64],
        rng: &mut SimRng,
    ) -> Result<TimeSeriesData> {
        Self::check(theta)?;
        if self.task == LvTask::Missing {
            return Err(missing(self.name(), "latent_conditional"));
        }
        let start = Self::start_state(carry)?;
        let mut path = self.simulate_from(theta, start, self.t1(), &self.future_times, rng);
        if path.truncated {
            if !path.exploded.iter().any(|&e| e) {
                return Err(AbcError::Numerical("future path hit the event cap".into()));
            }
            mark_exploded(&mut path);
        }
        Ok(TimeSeriesData::from_parts(
            self.future_times.clone(),
            2,
            path.values,
        ))
    }

    fn future_times(&self) -> Vec<f64> {
        self.future_times.clone()
    }

    fn future_labels(&self) -> Vec<String> {
        vec!["prey".into(), "predator".into()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::stats;

    const THETA: [f64; 3] = [1.0, 0.005, 0.6];

    #[test]
    fn grid_geometry() {
        let m = LotkaVolterraModel::new(LvTask::Case1, [100, 50]);
        assert_eq!(m.obs_times().len(), 81);
        assert_eq!(m.future_times().len(), 70);
        assert!((m.future_times()[69] - 45.0).abs() < 1e-9);
        let g = LotkaVolterraModel::new(LvTask::Missing, [100, 50]);
        assert_eq!(g.obs_times().len(), 102);
        assert!((g.obs_times()[51] - 36.0).abs() < 1e-9);
        assert!((g.obs_times()[101] - 51.0).abs() < 1e-9);
    }

    #[test]
    fn starts_at_initial_state() {
        let m = LotkaVolterraModel::new(LvTask::Case1, [100, 50]);
        let out = m
            .simulate(&THETA, SimRequest::Observed, &mut seeded(1))
            .unwrap();
        assert_eq!(out.observed.record(0), &[100.0, 50.0]);
        assert!(!out.truncated);
    }

    #[test]
    fn prey_free_state_only_loses_predators() {
        let m = LotkaVolterraModel::new(LvTask::Case1, [0, 30]);
        let out = m
            .simulate(&THETA, SimRequest::Observed, &mut seeded(2))
            .unwrap();
        let pred = out.observed.component(1);
        assert!(out.observed.component(0).iter().all(|&v| v == 0.0));
        assert!(pred.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn predator_free_prey_grows_exponentially() {
        let m = LotkaVolterraModel::new(LvTask::Case1, [10, 0]);
        let mut rng = seeded(3);
        let times = [1.0, 2.0];
        let n = 10_000;
        let ends: Vec<f64> = (0..n)
            .map(|_| {
                m.simulate_from(&THETA, [10, 0], 0.0, &times, &mut rng)
                    .values[2]
            })
            .collect();
        // Yule process: E z(t) = z0 e^{theta1 t}, Var = z0 e^{2t}(1 - e^{-t}).
        let mean = 10.0 * 2.0f64.exp();
        let var = 10.0 * 4.0f64.exp() * (1.0 - (-2.0f64).exp());
        let se = (var / n as f64).sqrt();
        assert!(
            (stats::mean(&ends) - mean).abs() < 4.0 * se,
            "{}",
            stats::mean(&ends)
        );
    }

    #[test]
    fn exact_and_shortcut_pure_birth_agree() {
        // Same law from the event-by-event loop (forced by a tiny predator
        // population with zero predation and death) and from the shortcut.
        let m = LotkaVolterraModel::new(LvTask::Case1, [10, 0]);
        let mut rng = seeded(4);
        let n = 20_000;
        let times = [1.0];
        let exact: Vec<f64> = (0..n)
            .map(|_| {
                m.simulate_from(&[1.0, 1e-300, 1e-300], [10, 1], 0.0, &times, &mut rng)
                    .values[0]
            })
            .collect();
        let short: Vec<f64> = (0..n)
            .map(|_| {
                m.simulate_from(&[1.0, 1.0, 1.0], [10, 0], 0.0, &times, &mut rng)
                    .values[0]
            })
            .collect();
        let d = stats::ks_two_sample(&exact, &short);
        assert!(stats::ks_pvalue(d, n as f64 / 2.0) > 0.001, "ks {d}");
    }

    #[test]
    fn case2_observes_prey_only() {
        let m = LotkaVolterraModel::new(LvTask::Case2, [100, 50]);
        let out = m
            .simulate(&THETA, SimRequest::LatentJoint, &mut seeded(5))
            .unwrap();
        assert_eq!(out.observed.width(), 1);
        let pred = out.observed.latents().unwrap();
        assert_eq!(out.latent_state.unwrap(), vec![pred[80]]);
    }

    #[test]
    fn missing_task_cannot_condition() {
        let m = LotkaVolterraModel::new(LvTask::Missing, [100, 50]);
        assert!(m
            .simulate_future(&THETA, &[1.0, 1.0], &mut seeded(0))
            .is_err());
        let out = m
            .simulate(&THETA, SimRequest::Joint, &mut seeded(6))
            .unwrap();
        assert_eq!(out.future.unwrap().len(), 69);
        assert_eq!(out.observed.len(), 102);
    }

    #[test]
    fn explosion_is_flagged() {
        let mut m = LotkaVolterraModel::new(LvTask::Case1, [100, 50]);
        m.event_cap = 1000;
        let out = m
            .simulate(&[7.0, 1e-4, 0.01], SimRequest::Observed, &mut seeded(7))
            .unwrap();
        assert!(out.truncated);
    }

    #[test]
    fn exploding_prey_is_reported_unbounded() {
        let m = LotkaVolterraModel::new(LvTask::Case1, [100, 50]);
        // No predators left: prey grows like exp(7 t) and passes the cap.
        let f = m
            .simulate_future(&[7.0, 0.005, 0.6], &[100.0, 0.0], &mut seeded(8))
            .unwrap();
        let prey = f.component(0);
        assert!(prey.last().unwrap().is_infinite());
        assert!(f.component(1).iter().all(|&v| v == 0.0));
    }
}
