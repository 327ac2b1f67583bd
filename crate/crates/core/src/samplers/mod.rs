//! ABC samplers and the predictive schemes built on them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discrepancy::AcceptanceRegion;
use crate::error::{AbcError, Result};
use crate::models::{register, SimRequest, Simulator};
use crate::prior::Prior;
use crate::rng::SimRng;
use crate::summaries::{compute_summary, SummarySpec};
use crate::types::{ParamVector, TimeSeriesData, WeightedDraw};

mod importance;
mod mcmc;
mod predict;
mod rejection;
mod tuning;

pub use importance::abc_importance;
pub use mcmc::{abc_mcmc, find_init, ChainState, InitStrategy, McmcSettings};
pub use predict::{abc_f_predict, abc_l_predict, defer_predictions};
pub use rejection::abc_rejection;
pub use tuning::{
    tune_mcmc_threshold, tune_rejection_threshold, TuneRound, TuneSettings, TunedThreshold,
};

/// What a sampler simulates alongside the pseudo-data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `z` only: standard ABC for `theta`.
    Standard,
    /// `(z, z~)`: ABC-P.
    #[serde(rename = "P")]
    Predictive,
    /// `(z, v)`: ABC-L, predictions filled in afterwards.
    #[serde(rename = "L")]
    Latent,
}

impl Mode {
    fn request(self) -> SimRequest {
        match self {
            Mode::Standard => SimRequest::Observed,
            Mode::Predictive => SimRequest::Joint,
            Mode::Latent => SimRequest::LatentJoint,
        }
    }
}

/// Everything fixed across one inference task.
#[derive(Clone)]
pub struct AbcProblem {
    pub model: Arc<dyn Simulator>,
    pub prior: Prior,
    pub spec: SummarySpec,
    pub region: AcceptanceRegion,
    pub observed: TimeSeriesData,
    pub s_obs: Vec<f64>,
}

impl std::fmt::Debug for AbcProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AbcProblem")
            .field("model", &self.model.name())
            .field("spec", &self.spec.id)
            .field("thresholds", &self.region.thresholds())
            .finish()
    }
}

impl AbcProblem {
    pub fn new(
        model: Arc<dyn Simulator>,
        prior: Prior,
        spec: SummarySpec,
        region: AcceptanceRegion,
        observed: TimeSeriesData,
    ) -> Result<Self> {
        register(model.as_ref())?;
        if prior.dim() != model.param_names().len() {
            return Err(AbcError::usage(format!(
                "prior has dimension {} but model '{}' has {} parameters",
                prior.dim(),
                model.name(),
                model.param_names().len()
            )));
        }
        region.validate(spec.dim())?;
        let s_obs = compute_summary(&spec, &observed)?;
        Ok(Self {
            model,
            prior,
            spec,
            region,
            observed,
            s_obs,
        })
    }

    /// Same problem with a different region.
    pub fn with_region(&self, region: AcceptanceRegion) -> Result<Self> {
        region.validate(self.spec.dim())?;
        let mut p = self.clone();
        p.region = region;
        Ok(p)
    }

    pub(crate) fn check_mode(&self, mode: Mode) -> Result<()> {
        let caps = self.model.capabilities();
        let missing = |c| AbcError::MissingCapability {
            model: self.model.name().to_string(),
            capability: c,
        };
        match mode {
            Mode::Standard => Ok(()),
            Mode::Predictive if !caps.joint => Err(missing("joint")),
            Mode::Latent if !caps.latent_joint => Err(missing("latent_joint")),
            _ => Ok(()),
        }
    }

    pub(crate) fn param(&self, values: Vec<f64>) -> Result<ParamVector> {
        ParamVector::new(values, self.model.param_names())
    }

    /// Simulates at `theta` and scores the result against the observation.
    pub(crate) fn evaluate(
        &self,
        theta: &[f64],
        mode: Mode,
        rng: &mut SimRng,
    ) -> Result<Evaluation> {
        let k = self.region.components.len();
        if !self.model.admissible(theta, &self.observed) {
            return Ok(Evaluation::rejected(k, false));
        }
        let out = self.model.simulate(theta, mode.request(), rng)?;
        if out.truncated {
            return Ok(Evaluation::rejected(k, true));
        }
        let summary = compute_summary(&self.spec, &out.observed)?;
        let raw = self.region.discrepancies(&self.s_obs, &summary);
        let kernel = self.region.weight_of(&raw);
        let carry = match mode {
            Mode::Latent => Some(
                self.model
                    .carry_state(&out.observed, out.latent_state.as_deref())?,
            ),
            _ => None,
        };
        Ok(Evaluation {
            summary,
            raw,
            kernel,
            prediction: out.future,
            latent: out.latent_state,
            carry,
            simulated: true,
        })
    }
}

/// Outcome of one simulate-and-compare step.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub summary: Vec<f64>,
    pub raw: Vec<f64>,
    pub kernel: f64,
    pub prediction: Option<TimeSeriesData>,
    pub latent: Option<Vec<f64>>,
    pub carry: Option<Vec<f64>>,
    pub simulated: bool,
}

impl Evaluation {
    fn rejected(components: usize, simulated: bool) -> Self {
        Self {
            summary: Vec::new(),
            raw: vec![f64::INFINITY; components],
            kernel: 0.0,
            prediction: None,
            latent: None,
            carry: None,
            simulated,
        }
    }

    pub(crate) fn into_draw(self, theta: ParamVector, weight: f64) -> WeightedDraw {
        WeightedDraw {
            theta,
            prediction: self.prediction,
            latent: self.latent,
            carry: self.carry,
            summary: self.summary,
            weight,
            multiplicity: 1,
            raw_discrepancy: self.raw,
        }
    }
}

/// Sampler output plus diagnostics.
#[derive(Debug, Clone)]
pub struct SamplerReport {
    pub draws: Vec<WeightedDraw>,
    /// Accepted / proposed (rejection) or accepted transitions per
    /// post-burn-in iteration (MCMC). For importance sampling, the fraction
    /// of draws with positive weight.
    pub acceptance_rate: f64,
    /// Importance sampling only.
    pub ess: Option<f64>,
    /// Forward simulations of `z` (joint or latent).
    pub n_simulations: u64,
    /// Simulations of `z~` done after sampling (ABC-F, ABC-L, deferral).
    pub n_conditional_simulations: u64,
    pub seed: u64,
    pub threshold_used: Vec<f64>,
    pub iterations: u64,
    /// Smallest first-component discrepancy seen.
    pub min_discrepancy: f64,
    pub warnings: Vec<String>,
}

impl SamplerReport {
    /// Total mass `sum weight * multiplicity`.
    pub fn total_mass(&self) -> f64 {
        self.draws.iter().map(WeightedDraw::mass).sum()
    }

    /// Parameter component `j` with per-draw masses.
    pub fn theta_column(&self, j: usize) -> (Vec<f64>, Vec<f64>) {
        let x = self.draws.iter().map(|d| d.theta.get(j)).collect();
        let w = self.draws.iter().map(WeightedDraw::mass).collect();
        (x, w)
    }

    /// Prediction value at record `i`, column `c`, over draws that carry a
    /// prediction.
    pub fn prediction_column(&self, i: usize, c: usize) -> (Vec<f64>, Vec<f64>) {
        let mut x = Vec::new();
        let mut w = Vec::new();
        for d in &self.draws {
            if let Some(p) = &d.prediction {
                x.push(p.record(i)[c]);
                w.push(d.mass());
            }
        }
        (x, w)
    }
}

/// Runs `f(i)` for `i in 0..m` on up to `workers` threads, returning the
/// results in index order.
pub(crate) fn run_indexed<T, F>(m: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let workers = workers.clamp(1, m.max(1));
    if workers == 1 {
        return (0..m).map(&f).collect();
    }
    let chunk = m.div_ceil(workers);
    let f = &f;
    let parts: Vec<Result<Vec<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = (w * chunk).min(m);
                let hi = ((w + 1) * chunk).min(m);
                s.spawn(move || (lo..hi).map(f).collect::<Result<Vec<T>>>())
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(m);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
