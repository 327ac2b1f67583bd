//! Threshold tuning by short pilot chains.
//!
//! A single pilot at `h = inf` records discrepancies at proposals drawn
//! around the prior, which for concentrated posteriors gives thresholds far
//! too loose. Instead the pilot budget is split into rounds: each round runs
//! a chain at the current threshold, records the effective discrepancy of
//! every proposal and sets the next threshold to the target quantile of
//! those. The proposals of the last round are then close to those of the
//! final chain, so its acceptance rate lands near the target.
//!
//! Without configured step scales the random-walk steps shrink along with
//! the threshold: after every round but the last they are set to
//! `2.38 / sqrt(p)` times the chain's spread in transformed space.

use serde::Serialize;

use super::mcmc::{default_steps, find_init, run_chain};
use super::run_indexed;
use super::{AbcProblem, InitStrategy, Mode};
use crate::discrepancy::{tune_threshold, AcceptanceRegion};
use crate::error::{AbcError, Result};
use crate::rng::{stream, streams};

#[derive(Debug, Clone)]
pub struct TuneSettings {
    /// Desired acceptance rate of the final chain, in `(0, 1)`.
    pub target: f64,
    pub rounds: usize,
    /// Total pilot iterations over all rounds.
    pub pilot_iterations: usize,
    /// Fixed steps; adapted during the pilot when absent.
    pub step_scales: Option<Vec<f64>>,
    pub init_budget: usize,
}

impl TuneSettings {
    pub fn new(target: f64) -> Self {
        Self {
            target,
            rounds: 20,
            pilot_iterations: 40_000,
            step_scales: None,
            init_budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TuneRound {
    pub threshold_used: f64,
    pub acceptance_rate: f64,
    pub next_threshold: f64,
}

#[derive(Debug, Clone)]
pub struct TunedThreshold {
    pub h: f64,
    /// The problem's region with the primary threshold set to `h`.
    pub region: AcceptanceRegion,
    /// A parameter whose simulation landed within `h` during the pilot.
    pub init_theta: Vec<f64>,
    pub rounds: Vec<TuneRound>,
    /// Steps of the last pilot round, to be used by the final chain.
    pub step_scales: Vec<f64>,
    pub n_simulations: u64,
}

impl TunedThreshold {
    pub fn init(&self) -> InitStrategy {
        InitStrategy::Theta(self.init_theta.clone())
    }
}

/// Tunes the first region component's threshold so that an ABC-MCMC chain
/// accepts roughly `target` of its proposals. For a dual region the second
/// threshold stays fixed and a proposal outside it counts as infinitely far.
pub fn tune_mcmc_threshold(
    problem: &AbcProblem,
    settings: &TuneSettings,
    seed: u64,
) -> Result<TunedThreshold> {
    if !(settings.target > 0.0 && settings.target < 1.0) {
        return Err(AbcError::usage("target acceptance rate must lie in (0, 1)"));
    }
    if settings.rounds == 0 || settings.pilot_iterations < settings.rounds {
        return Err(AbcError::usage(
            "tuning needs at least one pilot iteration per round",
        ));
    }
    let adapt = settings.step_scales.is_none();
    let mut steps = settings
        .step_scales
        .clone()
        .unwrap_or_else(|| default_steps(problem));
    let tilde = problem
        .region
        .is_dual()
        .then(|| problem.region.components[1].kernel.h);
    let per_round = settings.pilot_iterations / settings.rounds;
    let mut rng = stream(seed, streams::PILOT);

    let mut h = f64::INFINITY;
    let mut current = problem.with_region(problem.region.with_primary_threshold(h))?;
    let mut state = find_init(&current, settings.init_budget, Mode::Standard, &mut rng)?;
    let mut rounds = Vec::with_capacity(settings.rounds);
    let mut sims = 0u64;

    for round in 0..settings.rounds {
        let mut d_eff = Vec::with_capacity(per_round);
        let mut thetas = Vec::with_capacity(per_round);
        let mut hook = |raw: &[f64], theta: &crate::types::ParamVector| {
            let far = tilde.is_some_and(|ht| !(raw[1] <= ht));
            d_eff.push(if far { f64::INFINITY } else { raw[0] });
            thetas.push(theta.values().to_vec());
        };
        let run = run_chain(
            &current,
            state,
            &steps,
            0,
            per_round,
            Mode::Standard,
            &mut rng,
            Some(&mut hook),
        )?;
        sims += run.simulations;
        if adapt && round + 1 < settings.rounds {
            adapt_steps(problem, &run.draws, &mut steps);
        }
        let mut next = tune_threshold(&d_eff, settings.target)?;
        if !next.is_finite() {
            // Fewer than `target` of the proposals meet the fixed predictive
            // threshold. Tighten towards the ones that do, which moves the
            // chain to where that threshold is met more often.
            let mut met: Vec<f64> = d_eff.iter().copied().filter(|d| d.is_finite()).collect();
            if !met.is_empty() {
                met.sort_by(f64::total_cmp);
                next = crate::stats::quantile_sorted(&met, 0.5);
            }
        }
        rounds.push(TuneRound {
            threshold_used: h,
            acceptance_rate: run.accepted as f64 / per_round as f64,
            next_threshold: next,
        });
        if !next.is_finite() {
            // No proposal met the predictive threshold; keep the chain at
            // the current threshold.
            state = run.last;
            continue;
        }
        h = next;
        current = problem.with_region(problem.region.with_primary_threshold(h))?;
        state = match restart(&current, &run.last, &d_eff, &thetas, h, &mut rng)? {
            Some(s) => s,
            None => find_init(&current, settings.init_budget, Mode::Standard, &mut rng)?,
        };
    }
    if !h.is_finite() {
        return Err(AbcError::DegenerateSample {
            reason: "no pilot proposal met the predictive threshold".into(),
            min_discrepancy: f64::INFINITY,
        });
    }
    Ok(TunedThreshold {
        h,
        region: current.region.clone(),
        init_theta: state.theta.values().to_vec(),
        rounds,
        step_scales: steps,
        n_simulations: sims,
    })
}

/// Sets `steps` to a multiple of the spread of the chain `draws` in
/// transformed space. Components that never moved keep their step.
fn adapt_steps(problem: &AbcProblem, draws: &[crate::types::WeightedDraw], steps: &mut [f64]) {
    let p = steps.len();
    let points: Vec<(Vec<f64>, f64)> = draws
        .iter()
        .filter_map(|d| {
            let t = problem.prior.to_transformed(d.theta.values())?;
            Some((t, d.mass()))
        })
        .collect();
    for (j, step) in steps.iter_mut().enumerate() {
        let x: Vec<f64> = points.iter().map(|(t, _)| t[j]).collect();
        let w: Vec<f64> = points.iter().map(|(_, m)| *m).collect();
        let sd = crate::stats::weighted_variance(&x, &w).sqrt();
        if sd.is_finite() && sd > 0.0 {
            *step = 2.38 / (p as f64).sqrt() * sd;
        }
    }
}

/// Threshold for rejection sampling: the `target` quantile of the effective
/// discrepancies of `pilot` prior-predictive draws.
pub fn tune_rejection_threshold(
    problem: &AbcProblem,
    target: f64,
    pilot: usize,
    seed: u64,
    workers: usize,
) -> Result<f64> {
    if pilot == 0 {
        return Err(AbcError::usage("rejection pilot needs at least one draw"));
    }
    let open = problem.with_region(problem.region.with_primary_threshold(f64::INFINITY))?;
    let tilde = problem
        .region
        .is_dual()
        .then(|| problem.region.components[1].kernel.h);
    let d = run_indexed(pilot, workers, |i| {
        let mut rng = stream(seed, streams::PILOT_DRAW_BASE + i as u64);
        let theta = open.prior.sample(&mut rng);
        let ev = open.evaluate(theta.values(), Mode::Standard, &mut rng)?;
        let far = tilde.is_some_and(|ht| !(ev.raw[1] <= ht));
        Ok(if far { f64::INFINITY } else { ev.raw[0] })
    })?;
    let h = tune_threshold(&d, target)?;
    if !h.is_finite() {
        return Err(AbcError::DegenerateSample {
            reason: format!(
                "fewer than a fraction {target} of the pilot draws met the predictive threshold"
            ),
            min_discrepancy: d.iter().copied().fold(f64::INFINITY, f64::min),
        });
    }
    Ok(h)
}

/// A valid state under the new threshold: the last chain state if it still
/// qualifies, else a fresh simulation at one of the latest qualifying
/// proposals.
fn restart(
    problem: &AbcProblem,
    last: &super::ChainState,
    d_eff: &[f64],
    thetas: &[Vec<f64>],
    h: f64,
    rng: &mut crate::rng::SimRng,
) -> Result<Option<super::ChainState>> {
    let init = InitStrategy::State(Box::new(last.clone()));
    if let Ok(s) = super::mcmc::start_state(problem, &init, 0, Mode::Standard, rng) {
        return Ok(Some(s));
    }
    let candidates = d_eff
        .iter()
        .zip(thetas)
        .rev()
        .filter(|(d, _)| **d <= h)
        .take(20);
    for (_, theta) in candidates {
        let init = InitStrategy::Theta(theta.clone());
        match super::mcmc::start_state(problem, &init, 50, Mode::Standard, rng) {
            Ok(s) => return Ok(Some(s)),
            Err(AbcError::Init { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::testkit::markov_problem;
    use crate::samplers::{abc_mcmc, McmcSettings};

    #[test]
    fn tuned_chain_lands_near_target() {
        let p = markov_problem(1.0, "markov.s1");
        let t = tune_mcmc_threshold(&p, &TuneSettings::new(0.1), 3).unwrap();
        assert!(t.h.is_finite() && t.h > 0.0);
        let tuned = p.with_region(t.region.clone()).unwrap();
        let mut s = McmcSettings::new(5000, 200);
        s.init = t.init();
        s.step_scales = Some(t.step_scales.clone());
        let r = abc_mcmc(&tuned, &s, Mode::Standard, 4).unwrap();
        assert!(
            r.acceptance_rate > 0.05 && r.acceptance_rate < 0.2,
            "rate {}",
            r.acceptance_rate
        );
    }

    #[test]
    fn rejects_bad_target() {
        let p = markov_problem(1.0, "markov.s1");
        assert!(tune_mcmc_threshold(&p, &TuneSettings::new(1.0), 3).is_err());
    }
}
