use rand::Rng;
use rand_distr::StandardNormal;

use super::{AbcProblem, Evaluation, Mode, SamplerReport};
use crate::error::{AbcError, Result};
use crate::rng::{stream, streams, SimRng};
use crate::types::{ParamVector, TimeSeriesData, WeightedDraw};

/// Where a chain starts.
#[derive(Debug, Clone)]
pub enum InitStrategy {
    /// Prior draws until one lands in the region.
    Prior,
    /// Re-simulate at a fixed parameter until the region is hit.
    Theta(Vec<f64>),
    /// A state from an earlier chain, used as is.
    State(Box<ChainState>),
}

#[derive(Debug, Clone)]
pub struct McmcSettings {
    /// Recorded iterations after burn-in.
    pub iterations: usize,
    pub burn_in: usize,
    /// Random-walk scales in transformed coordinates; `None` uses half the
    /// prior range over `sqrt(p)`.
    pub step_scales: Option<Vec<f64>>,
    pub init: InitStrategy,
    /// Simulations allowed for finding a starting state.
    pub init_budget: usize,
}

impl McmcSettings {
    pub fn new(iterations: usize, burn_in: usize) -> Self {
        Self {
            iterations,
            burn_in,
            step_scales: None,
            init: InitStrategy::Prior,
            init_budget: 1_000_000,
        }
    }
}

/// Current state of an ABC-MCMC chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub theta: ParamVector,
    pub summary: Vec<f64>,
    pub raw_discrepancy: Vec<f64>,
    pub kernel: f64,
    pub prediction: Option<TimeSeriesData>,
    pub latent: Option<Vec<f64>>,
    pub carry: Option<Vec<f64>>,
    transformed: Vec<f64>,
    prior_density: f64,
}

impl ChainState {
    pub fn kernel_weight_ok(&self) -> bool {
        self.kernel > 0.0
    }

    fn from_eval(problem: &AbcProblem, theta: ParamVector, ev: Evaluation) -> Option<Self> {
        let transformed = problem.prior.to_transformed(theta.values())?;
        let prior_density = problem.prior.density_transformed(&transformed);
        Some(Self {
            theta,
            summary: ev.summary,
            raw_discrepancy: ev.raw,
            kernel: ev.kernel,
            prediction: ev.prediction,
            latent: ev.latent,
            carry: ev.carry,
            transformed,
            prior_density,
        })
    }

    fn to_draw(&self) -> WeightedDraw {
        WeightedDraw {
            theta: self.theta.clone(),
            prediction: self.prediction.clone(),
            latent: self.latent.clone(),
            carry: self.carry.clone(),
            summary: self.summary.clone(),
            weight: 1.0,
            multiplicity: 1,
            raw_discrepancy: self.raw_discrepancy.clone(),
        }
    }

    /// Whether the state carries what `mode` needs.
    fn fits(&self, mode: Mode) -> bool {
        match mode {
            Mode::Standard => true,
            Mode::Predictive => self.prediction.is_some(),
            Mode::Latent => self.latent.is_some() && self.carry.is_some(),
        }
    }
}

/// Draws from the prior until a simulation lands in the region.
pub fn find_init(
    problem: &AbcProblem,
    budget: usize,
    mode: Mode,
    rng: &mut SimRng,
) -> Result<ChainState> {
    let mut min_d = f64::INFINITY;
    for _ in 0..budget {
        let theta = problem.prior.sample(rng);
        let ev = problem.evaluate(theta.values(), mode, rng)?;
        min_d = min_d.min(ev.raw[0]);
        if ev.kernel > 0.0 {
            if let Some(s) = ChainState::from_eval(problem, theta, ev) {
                return Ok(s);
            }
        }
    }
    Err(AbcError::Init {
        attempts: budget,
        min_discrepancy: min_d,
    })
}

fn init_at(
    problem: &AbcProblem,
    theta: &[f64],
    budget: usize,
    mode: Mode,
    rng: &mut SimRng,
) -> Result<ChainState> {
    if !problem.prior.contains(theta) {
        return Err(AbcError::usage(
            "initial parameter lies outside the prior support",
        ));
    }
    let mut min_d = f64::INFINITY;
    for _ in 0..budget {
        let ev = problem.evaluate(theta, mode, rng)?;
        min_d = min_d.min(ev.raw[0]);
        if ev.kernel > 0.0 {
            let p = problem.param(theta.to_vec())?;
            if let Some(s) = ChainState::from_eval(problem, p, ev) {
                return Ok(s);
            }
        }
    }
    Err(AbcError::Init {
        attempts: budget,
        min_discrepancy: min_d,
    })
}

pub(crate) fn default_steps(problem: &AbcProblem) -> Vec<f64> {
    let p = problem.prior.dim() as f64;
    problem
        .prior
        .ranges()
        .iter()
        .map(|r| 0.5 * r / p.sqrt())
        .collect()
}

pub(crate) fn start_state(
    problem: &AbcProblem,
    init: &InitStrategy,
    budget: usize,
    mode: Mode,
    rng: &mut SimRng,
) -> Result<ChainState> {
    match init {
        InitStrategy::Prior => find_init(problem, budget, mode, rng),
        InitStrategy::Theta(t) => init_at(problem, t, budget, mode, rng),
        InitStrategy::State(s) => {
            let s = s.as_ref().clone();
            if !s.fits(mode) {
                return Err(AbcError::usage(
                    "initial state lacks the outputs this mode needs",
                ));
            }
            // The region may differ from the one the state was found under.
            let raw = problem.region.discrepancies(&problem.s_obs, &s.summary);
            let kernel = problem.region.weight_of(&raw);
            if kernel <= 0.0 {
                return Err(AbcError::Init {
                    attempts: 0,
                    min_discrepancy: raw[0],
                });
            }
            Ok(ChainState {
                raw_discrepancy: raw,
                kernel,
                ..s
            })
        }
    }
}

/// Per-proposal hook used by threshold tuning: receives the raw
/// discrepancies (infinite when no simulation was run) and the proposal.
pub(crate) type ProposalHook<'a> = &'a mut dyn FnMut(&[f64], &ParamVector);

pub(crate) struct ChainRun {
    pub draws: Vec<WeightedDraw>,
    pub accepted: u64,
    pub simulations: u64,
    pub min_discrepancy: f64,
    pub last: ChainState,
}

/// Runs `burn_in + iterations` Metropolis-Hastings steps from `state`.
pub(crate) fn run_chain(
    problem: &AbcProblem,
    mut state: ChainState,
    steps: &[f64],
    burn_in: usize,
    iterations: usize,
    mode: Mode,
    rng: &mut SimRng,
    mut hook: Option<ProposalHook<'_>>,
) -> Result<ChainRun> {
    let k = problem.region.components.len();
    let mut draws: Vec<WeightedDraw> = Vec::new();
    let mut accepted = 0u64;
    let mut sims = 0u64;
    let mut min_d = state.raw_discrepancy[0];
    for it in 0..burn_in + iterations {
        let t: Vec<f64> = state
            .transformed
            .iter()
            .zip(steps)
            .map(|(x, s)| x + s * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let pi = problem.prior.density_transformed(&t);
        // Outside the support the back-transform may overflow; skip it.
        let (theta, ev) = if pi > 0.0 {
            let theta = problem.param(problem.prior.from_transformed(&t))?;
            let ev = problem.evaluate(theta.values(), mode, rng)?;
            (theta, ev)
        } else {
            (state.theta.clone(), Evaluation::rejected(k, false))
        };
        sims += ev.simulated as u64;
        min_d = min_d.min(ev.raw[0]);
        if let Some(h) = hook.as_mut() {
            h(&ev.raw, &theta);
        }
        let mut moved = false;
        if ev.kernel > 0.0 {
            let alpha = (ev.kernel * pi) / (state.kernel * state.prior_density);
            if alpha >= 1.0 || rng.random::<f64>() < alpha {
                state = ChainState {
                    theta,
                    summary: ev.summary,
                    raw_discrepancy: ev.raw,
                    kernel: ev.kernel,
                    prediction: ev.prediction,
                    latent: ev.latent,
                    carry: ev.carry,
                    transformed: t,
                    prior_density: pi,
                };
                moved = true;
            }
        }
        if it < burn_in {
            continue;
        }
        accepted += moved as u64;
        match draws.last_mut() {
            Some(last) if !moved => last.multiplicity += 1,
            _ => draws.push(state.to_draw()),
        }
    }
    Ok(ChainRun {
        draws,
        accepted,
        simulations: sims,
        min_discrepancy: min_d,
        last: state,
    })
}

/// ABC-MCMC with a Gaussian random walk on the transformed parameters.
///
/// Rejected proposals repeat the whole state, including any simulated
/// future or latent, and are stored by bumping the multiplicity of the last
/// draw.
pub fn abc_mcmc(
    problem: &AbcProblem,
    settings: &McmcSettings,
    mode: Mode,
    seed: u64,
) -> Result<SamplerReport> {
    if settings.iterations == 0 {
        return Err(AbcError::usage(
            "MCMC needs at least one recorded iteration",
        ));
    }
    problem.check_mode(mode)?;
    let steps = match &settings.step_scales {
        Some(s) if s.len() != problem.prior.dim() => {
            return Err(AbcError::usage(format!(
                "{} step scales given for {} parameters",
                s.len(),
                problem.prior.dim()
            )))
        }
        Some(s) if s.iter().any(|x| !(x.is_finite() && *x >= 0.0)) => {
            return Err(AbcError::usage(
                "step scales must be finite and non-negative",
            ))
        }
        Some(s) => s.clone(),
        None => default_steps(problem),
    };
    let mut init_rng = stream(seed, streams::INIT);
    let state = start_state(
        problem,
        &settings.init,
        settings.init_budget,
        mode,
        &mut init_rng,
    )?;
    let mut rng = stream(seed, streams::MAIN);
    let run = run_chain(
        problem,
        state,
        &steps,
        settings.burn_in,
        settings.iterations,
        mode,
        &mut rng,
        None,
    )?;
    Ok(SamplerReport {
        draws: run.draws,
        acceptance_rate: run.accepted as f64 / settings.iterations as f64,
        ess: None,
        n_simulations: run.simulations,
        n_conditional_simulations: 0,
        seed,
        threshold_used: problem.region.thresholds(),
        iterations: (settings.burn_in + settings.iterations) as u64,
        min_discrepancy: run.min_discrepancy,
        warnings: Vec::new(),
    })
}
