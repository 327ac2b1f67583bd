use rand::Rng;

use super::{run_indexed, AbcProblem, Mode, SamplerReport};
use crate::error::{AbcError, Result};
use crate::rng::{stream, streams::DRAW_BASE};

/// Rejection ABC with `m` prior proposals. Accepted draws carry weight 1.
///
/// A proposal is accepted with probability `K(s_y, s_z)`; for uniform kernels
/// that is the indicator of the region. Zero acceptances are not an error;
/// the report carries a warning with the smallest discrepancy seen.
pub fn abc_rejection(
    problem: &AbcProblem,
    m: usize,
    mode: Mode,
    seed: u64,
    workers: usize,
) -> Result<SamplerReport> {
    if m == 0 {
        return Err(AbcError::usage("rejection sampler needs m >= 1"));
    }
    problem.check_mode(mode)?;
    let outcomes = run_indexed(m, workers, |i| {
        let mut rng = stream(seed, DRAW_BASE + i as u64);
        let theta = problem.prior.sample(&mut rng);
        let ev = problem.evaluate(theta.values(), mode, &mut rng)?;
        let simulated = ev.simulated;
        let d0 = ev.raw[0];
        let accept = ev.kernel >= 1.0 || (ev.kernel > 0.0 && rng.random::<f64>() < ev.kernel);
        Ok((accept.then(|| ev.into_draw(theta, 1.0)), simulated, d0))
    })?;

    let mut draws = Vec::new();
    let mut n_sim = 0u64;
    let mut min_d = f64::INFINITY;
    for (draw, simulated, d0) in outcomes {
        n_sim += simulated as u64;
        min_d = min_d.min(d0);
        if let Some(d) = draw {
            draws.push(d);
        }
    }
    let mut warnings = Vec::new();
    if draws.is_empty() {
        warnings.push(format!(
            "no proposals accepted out of {m}; smallest discrepancy {min_d}"
        ));
    }
    Ok(SamplerReport {
        acceptance_rate: draws.len() as f64 / m as f64,
        draws,
        ess: None,
        n_simulations: n_sim,
        n_conditional_simulations: 0,
        seed,
        threshold_used: problem.region.thresholds(),
        iterations: m as u64,
        min_discrepancy: min_d,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::testkit::markov_problem;

    #[test]
    fn infinite_threshold_accepts_everything() {
        let p = markov_problem(f64::INFINITY, "markov.s1");
        let r = abc_rejection(&p, 200, Mode::Standard, 1, 1).unwrap();
        assert_eq!(r.draws.len(), 200);
        assert_eq!(r.acceptance_rate, 1.0);
    }

    #[test]
    fn zero_threshold_warns() {
        let p = markov_problem(0.0, "markov.s1");
        let r = abc_rejection(&p, 50, Mode::Standard, 1, 1).unwrap();
        assert!(r.draws.is_empty());
        assert_eq!(r.warnings.len(), 1);
        assert!(r.min_discrepancy.is_finite());
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let p = markov_problem(0.3, "markov.s1");
        let a = abc_rejection(&p, 300, Mode::Predictive, 5, 1).unwrap();
        let b = abc_rejection(&p, 300, Mode::Predictive, 5, 4).unwrap();
        assert_eq!(a.draws.len(), b.draws.len());
        for (x, y) in a.draws.iter().zip(&b.draws) {
            assert_eq!(x.theta, y.theta);
            assert_eq!(x.prediction, y.prediction);
        }
    }

    #[test]
    fn accepted_draws_lie_in_region() {
        let p = markov_problem(0.2, "markov.s1");
        let r = abc_rejection(&p, 500, Mode::Standard, 2, 2).unwrap();
        assert!(!r.draws.is_empty());
        assert!(r
            .draws
            .iter()
            .all(|d| d.raw_discrepancy[0] <= 0.2 && d.weight == 1.0));
    }
}
