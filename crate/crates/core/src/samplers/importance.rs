use super::{run_indexed, AbcProblem, Mode, SamplerReport};
use crate::error::{AbcError, Result};
use crate::prior::Prior;
use crate::rng::{stream, streams::DRAW_BASE};
use crate::stats::ess;

/// Importance-sampling ABC with proposal `q`.
///
/// Every draw is kept, with normalised weight proportional to
/// `K(s_y, s_z) pi(theta) / q(theta)`. Draws outside the prior support get
/// weight zero without a simulation. With `q` equal to the prior and a
/// uniform kernel, the positive-weight draws are exactly those
/// [`abc_rejection`](super::abc_rejection) accepts for the same seed.
pub fn abc_importance(
    problem: &AbcProblem,
    q: &Prior,
    m: usize,
    mode: Mode,
    seed: u64,
    workers: usize,
) -> Result<SamplerReport> {
    if m == 0 {
        return Err(AbcError::usage("importance sampler needs m >= 1"));
    }
    if !problem.prior.same_parameterisation(q) {
        return Err(AbcError::usage(
            "proposal must share the prior's dimension and transforms",
        ));
    }
    problem.check_mode(mode)?;
    let outcomes = run_indexed(m, workers, |i| {
        let mut rng = stream(seed, DRAW_BASE + i as u64);
        let theta = q.sample(&mut rng);
        let pi = problem.prior.density(&theta)?;
        let qd = q.density(&theta)?;
        let ev = if pi > 0.0 {
            problem.evaluate(theta.values(), mode, &mut rng)?
        } else {
            super::Evaluation::rejected(problem.region.components.len(), false)
        };
        let w = if ev.kernel > 0.0 {
            ev.kernel * pi / qd
        } else {
            0.0
        };
        let simulated = ev.simulated;
        Ok((ev.into_draw(theta, w), simulated))
    })?;

    let mut draws = Vec::with_capacity(m);
    let mut n_sim = 0u64;
    for (d, s) in outcomes {
        n_sim += s as u64;
        draws.push(d);
    }
    let min_d = draws
        .iter()
        .map(|d| d.raw_discrepancy[0])
        .fold(f64::INFINITY, f64::min);
    let total: f64 = draws.iter().map(|d| d.weight).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(AbcError::DegenerateSample {
            reason: format!("all {m} importance weights are zero"),
            min_discrepancy: min_d,
        });
    }
    for d in &mut draws {
        d.weight /= total;
    }
    let weights: Vec<f64> = draws.iter().map(|d| d.weight).collect();
    let positive = weights.iter().filter(|&&w| w > 0.0).count();
    Ok(SamplerReport {
        ess: Some(ess(&weights)?),
        acceptance_rate: positive as f64 / m as f64,
        draws,
        n_simulations: n_sim,
        n_conditional_simulations: 0,
        seed,
        threshold_used: problem.region.thresholds(),
        iterations: m as u64,
        min_discrepancy: min_d,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::abc_rejection;
    use crate::samplers::testkit::markov_problem;

    #[test]
    fn prior_proposal_reproduces_rejection() {
        let p = markov_problem(0.25, "markov.s1");
        let rej = abc_rejection(&p, 400, Mode::Standard, 8, 1).unwrap();
        let is = abc_importance(&p, &p.prior, 400, Mode::Standard, 8, 3).unwrap();
        let kept: Vec<_> = is.draws.iter().filter(|d| d.weight > 0.0).collect();
        assert_eq!(kept.len(), rej.draws.len());
        for (a, b) in kept.iter().zip(&rej.draws) {
            assert_eq!(a.theta, b.theta);
        }
        let w0 = kept[0].weight;
        assert!(kept.iter().all(|d| (d.weight - w0).abs() < 1e-15));
        assert!((is.ess.unwrap() - kept.len() as f64).abs() < 1e-6);
    }

    #[test]
    fn all_zero_weights_is_degenerate() {
        let p = markov_problem(0.0, "markov.s1");
        let r = abc_importance(&p, &p.prior, 30, Mode::Standard, 1, 1);
        assert!(matches!(r, Err(AbcError::DegenerateSample { .. })));
    }

    #[test]
    fn proposal_outside_support_gets_zero_weight() {
        let p = markov_problem(f64::INFINITY, "markov.s1");
        let q = Prior::uniform(vec![-10.0], vec![10.0], p.prior.names().clone()).unwrap();
        let r = abc_importance(&p, &q, 400, Mode::Standard, 3, 1).unwrap();
        for d in &r.draws {
            let inside = d.theta.get(0).abs() <= 5.0;
            assert_eq!(d.weight > 0.0, inside);
        }
        assert!(r.n_simulations < 400);
    }
}
