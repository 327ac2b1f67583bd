//! Filling in predictions after sampling.

use super::{AbcProblem, SamplerReport};
use crate::error::{AbcError, Result};
use crate::models::Simulator;
use crate::rng::{stream, streams};

fn need(model: &dyn Simulator, ok: bool, capability: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(AbcError::MissingCapability {
            model: model.name().to_string(),
            capability,
        })
    }
}

/// Applies `carry_of` to each positive-mass draw and simulates its future.
fn fill<F>(
    report: &SamplerReport,
    model: &dyn Simulator,
    seed: u64,
    mut carry_of: F,
) -> Result<SamplerReport>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    let mut out = report.clone();
    let mut rng = stream(seed, streams::PREDICTION);
    let mut count = 0u64;
    for (i, d) in out.draws.iter_mut().enumerate() {
        if d.mass() <= 0.0 {
            d.prediction = None;
            continue;
        }
        let carry = carry_of(i)?;
        d.prediction = Some(model.simulate_future(d.theta.values(), &carry, &mut rng)?);
        count += 1;
    }
    out.n_conditional_simulations += count;
    Ok(out)
}

/// ABC-F: `z~ ~ pi(. | theta, y)` for each retained `theta`.
pub fn abc_f_predict(
    report: &SamplerReport,
    problem: &AbcProblem,
    seed: u64,
) -> Result<SamplerReport> {
    let model = problem.model.as_ref();
    need(model, model.capabilities().conditional, "conditional")?;
    let carry = model.carry_state(&problem.observed, None)?;
    fill(report, model, seed, |_| Ok(carry.clone()))
}

/// ABC-L: `z~ ~ pi(. | theta, v, y)` for each retained `(theta, v)`.
pub fn abc_l_predict(
    report: &SamplerReport,
    problem: &AbcProblem,
    seed: u64,
) -> Result<SamplerReport> {
    let model = problem.model.as_ref();
    need(
        model,
        model.capabilities().latent_conditional,
        "latent_conditional",
    )?;
    fill(report, model, seed, |i| {
        let latent = report.draws[i].latent.as_deref().ok_or_else(|| {
            AbcError::Invariant(format!("draw {i} has positive weight but no latent state"))
        })?;
        model.carry_state(&problem.observed, Some(latent))
    })
}

/// ABC-P by deferral: `z~ ~ pi(. | theta, v, z)` using the conditioning state
/// recorded from each draw's own simulation. Distributionally the same as
/// simulating `(z, z~)` jointly, but only accepted draws pay for `z~`.
pub fn defer_predictions(
    report: &SamplerReport,
    model: &dyn Simulator,
    seed: u64,
) -> Result<SamplerReport> {
    need(
        model,
        model.capabilities().latent_conditional,
        "latent_conditional",
    )?;
    fill(report, model, seed, |i| {
        report.draws[i].carry.clone().ok_or_else(|| {
            AbcError::Invariant(format!(
                "draw {i} has positive weight but no recorded conditioning state"
            ))
        })
    })
}
