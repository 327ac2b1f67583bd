use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{compute_summary, SummarySpec};
use crate::error::{AbcError, Result};
use crate::models::{SimRequest, Simulator};
use crate::rng::SimRng;
use crate::stats;
use crate::types::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationMethod {
    /// Empirical covariance matrix of the summaries.
    Covariance,
    /// Squared median absolute deviation per component.
    Mad,
}

/// Scale information for a weighted norm.
#[derive(Debug, Clone)]
pub struct WeightCalibration {
    pub method: CalibrationMethod,
    /// Covariance matrix (covariance method).
    pub matrix: Option<DMatrix<f64>>,
    /// Squared MADs (mad method).
    pub mad2: Option<Vec<f64>>,
    pub n_pilot: usize,
    pub theta_ref: Option<ParamVector>,
    /// Whether the diagonal jitter had to be added.
    pub jittered: bool,
}

impl WeightCalibration {
    pub fn dim(&self) -> usize {
        match (&self.matrix, &self.mad2) {
            (Some(m), _) => m.nrows(),
            (_, Some(v)) => v.len(),
            _ => 0,
        }
    }
}

/// Builds the calibration from pilot summary vectors (rows).
pub fn calibrate_from_vectors(
    rows: &[Vec<f64>],
    method: CalibrationMethod,
) -> Result<WeightCalibration> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if n < 2 || d == 0 {
        return Err(AbcError::usage(
            "calibration needs at least two nonempty pilot vectors",
        ));
    }
    let column = |j: usize| -> Vec<f64> { rows.iter().map(|r| r[j]).collect() };
    match method {
        CalibrationMethod::Covariance => {
            let means: Vec<f64> = (0..d).map(|j| stats::mean(&column(j))).collect();
            let mut c = DMatrix::<f64>::zeros(d, d);
            for r in rows {
                for i in 0..d {
                    for j in 0..=i {
                        c[(i, j)] += (r[i] - means[i]) * (r[j] - means[j]);
                    }
                }
            }
            for i in 0..d {
                for j in 0..=i {
                    let v = c[(i, j)] / (n - 1) as f64;
                    c[(i, j)] = v;
                    c[(j, i)] = v;
                }
            }
            if let Some(i) = (0..d).find(|&i| c[(i, i)] <= 0.0) {
                return Err(AbcError::Calibration {
                    component: i,
                    measure: "variance",
                });
            }
            let mut jittered = false;
            if c.clone().cholesky().is_none() {
                let jitter = 1e-10 * c.trace() / d as f64;
                for i in 0..d {
                    c[(i, i)] += jitter;
                }
                jittered = true;
                if c.clone().cholesky().is_none() {
                    return Err(AbcError::Numerical(
                        "summary covariance is not positive definite even after jitter".into(),
                    ));
                }
            }
            Ok(WeightCalibration {
                method,
                matrix: Some(c),
                mad2: None,
                n_pilot: n,
                theta_ref: None,
                jittered,
            })
        }
        CalibrationMethod::Mad => {
            let mut mad2 = Vec::with_capacity(d);
            for j in 0..d {
                let m = stats::mad(&column(j));
                if m <= 0.0 {
                    return Err(AbcError::Calibration {
                        component: j,
                        measure: "median absolute deviation",
                    });
                }
                mad2.push(m * m);
            }
            Ok(WeightCalibration {
                method,
                matrix: None,
                mad2: Some(mad2),
                n_pilot: n,
                theta_ref: None,
                jittered: false,
            })
        }
    }
}

/// Simulates `n_pilot` datasets at `theta_ref` and calibrates the summary
/// components in `slice`. Paths that hit a simulator cap are skipped.
pub fn calibrate_weights(
    model: &dyn Simulator,
    theta_ref: &ParamVector,
    spec: &SummarySpec,
    slice: Range<usize>,
    method: CalibrationMethod,
    n_pilot: usize,
    rng: &mut SimRng,
) -> Result<WeightCalibration> {
    let d = slice.len();
    if method == CalibrationMethod::Covariance && n_pilot < 10 * d {
        return Err(AbcError::usage(format!(
            "covariance calibration needs at least {} pilot runs for {d} components, got {n_pilot}",
            10 * d
        )));
    }
    let mut rows = Vec::with_capacity(n_pilot);
    let mut attempts = 0;
    while rows.len() < n_pilot {
        attempts += 1;
        if attempts > 10 * n_pilot.max(1) {
            return Err(AbcError::Numerical(
                "too many truncated pilot simulations during calibration".into(),
            ));
        }
        let out = model.simulate(theta_ref.values(), SimRequest::Observed, rng)?;
        if out.truncated {
            continue;
        }
        let s = compute_summary(spec, &out.observed)?;
        rows.push(s[slice.clone()].to_vec());
    }
    let mut cal = calibrate_from_vectors(&rows, method)?;
    cal.theta_ref = Some(theta_ref.clone());
    Ok(cal)
}
