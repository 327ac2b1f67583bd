//! Ideal predictives: forward simulation from the true parameter and the
//! true conditioning state.

use crate::error::{AbcError, Result};
use crate::models::{LotkaVolterraModel, LvTask, Simulator};
use crate::rng::SimRng;
use crate::types::TimeSeriesData;

/// `n_draws` samples of `z~ | carry, theta_true`.
pub fn ideal_predictive(
    model: &dyn Simulator,
    theta_true: &[f64],
    carry: &[f64],
    n_draws: usize,
    rng: &mut SimRng,
) -> Result<Vec<TimeSeriesData>> {
    (0..n_draws)
        .map(|_| model.simulate_future(theta_true, carry, rng))
        .collect()
}

/// Gap predictive obtained by rejection on the far edge of the gap.
#[derive(Debug, Clone)]
pub struct GapIdeal {
    pub accepted: Vec<TimeSeriesData>,
    pub attempts: usize,
    pub radius: f64,
}

/// Simulates from the record at the start of the gap through to the first
/// record after it, keeping paths whose end lands within `radius` (L-infinity)
/// of the observed record there.
pub fn lv_gap_ideal(
    model: &LotkaVolterraModel,
    theta_true: &[f64],
    observed: &TimeSeriesData,
    radius: f64,
    n_draws: usize,
    rng: &mut SimRng,
) -> Result<GapIdeal> {
    if model.task != LvTask::Missing {
        return Err(AbcError::usage(
            "gap oracle applies to the missing-data task only",
        ));
    }
    let edge = observed
        .times()
        .iter()
        .position(|&t| t > model.t1())
        .ok_or_else(|| AbcError::usage("observed data has no record after the gap"))?;
    let start = observed.record(edge - 1);
    let target = observed.record(edge).to_vec();
    let start = [start[0] as u64, start[1] as u64];
    let mut times = model.future_times();
    let n_gap = times.len();
    times.push(observed.times()[edge]);
    let mut accepted = Vec::new();
    let mut closest = f64::INFINITY;
    for _ in 0..n_draws {
        let path = model.simulate_from(theta_true, start, model.t1(), &times, rng);
        if path.truncated {
            continue;
        }
        let end = &path.values[2 * n_gap..];
        let d = end
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        closest = closest.min(d);
        if d <= radius {
            accepted.push(TimeSeriesData::from_parts(
                model.future_times(),
                2,
                path.values[..2 * n_gap].to_vec(),
            ));
        }
    }
    if accepted.is_empty() {
        return Err(AbcError::DegenerateSample {
            reason: format!("no gap path ended within radius {radius}; the radius is too small"),
            min_discrepancy: closest,
        });
    }
    Ok(GapIdeal {
        accepted,
        attempts: n_draws,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::SimRequest;
    use crate::rng::seeded;

    #[test]
    fn zero_radius_on_moving_state_reports_diagnostic() {
        let m = LotkaVolterraModel::new(LvTask::Missing, [100, 50]);
        let theta = [1.0, 0.005, 0.6];
        let obs = m
            .simulate(&theta, SimRequest::Observed, &mut seeded(1))
            .unwrap()
            .observed;
        // Shift the target off the integer lattice: no path can match exactly.
        let mut vals = obs.values().to_vec();
        vals[2 * 51] += 0.5;
        let shifted = TimeSeriesData::new(obs.times().to_vec(), 2, vals).unwrap();
        let r = lv_gap_ideal(&m, &theta, &shifted, 0.0, 50, &mut seeded(2));
        assert!(matches!(r, Err(AbcError::DegenerateSample { .. })));
    }

    #[test]
    fn queue_ideal_has_requested_size() {
        use crate::models::Mg1Model;
        let m = Mg1Model::new(10, 5).unwrap();
        let d =
            ideal_predictive(&m, &[4.0, 7.0, 0.15], &[100.0, 90.0], 20, &mut seeded(3)).unwrap();
        assert_eq!(d.len(), 20);
        assert_eq!(d[0].len(), 5);
    }
}
