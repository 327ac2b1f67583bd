//! Kernels, norms and acceptance regions.
//!
//! A region has one component (single threshold) or two (a parametric slice
//! and a predictive slice with separate thresholds); its weight is the
//! product of the component kernel values.

use std::ops::Range;

use nalgebra::{Cholesky, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{AbcError, Result};
use crate::stats;
use crate::summaries::WeightCalibration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub h: f64,
}

impl Kernel {
    pub fn uniform(h: f64) -> Self {
        Self {
            kind: KernelKind::Uniform,
            h,
        }
    }

    pub fn gaussian(h: f64) -> Self {
        Self {
            kind: KernelKind::Gaussian,
            h,
        }
    }

    /// `K_h(r)`: `1{r <= h}` or `exp(-r^2 / (2 h^2))`.
    pub fn weight(&self, r: f64) -> f64 {
        match self.kind {
            KernelKind::Uniform => {
                if r <= self.h {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::Gaussian => {
                if self.h.is_infinite() {
                    1.0
                } else {
                    (-r * r / (2.0 * self.h * self.h)).exp()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// `r^T C^{-1} r`; deliberately without a square root.
    WeightedQuadratic,
    /// `sqrt(sum r_i^2 / w_i)`, `w_i` squared MADs.
    WeightedEuclidean,
    /// Plain `sqrt(sum r_i^2)`.
    Euclidean,
    /// `max |r_i|`
    LInfinity,
}

#[derive(Debug, Clone)]
pub struct Norm {
    kind: NormKind,
    chol: Option<Cholesky<f64, Dyn>>,
    scales: Option<Vec<f64>>,
}

impl Norm {
    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn euclidean() -> Self {
        Self {
            kind: NormKind::Euclidean,
            chol: None,
            scales: None,
        }
    }

    pub fn l_infinity() -> Self {
        Self {
            kind: NormKind::LInfinity,
            chol: None,
            scales: None,
        }
    }

    pub fn weighted_quadratic(cal: &WeightCalibration) -> Result<Self> {
        let m = cal.matrix.clone().ok_or_else(|| {
            AbcError::usage("weighted-quadratic norm needs a covariance calibration")
        })?;
        let chol = m.cholesky().ok_or_else(|| {
            AbcError::Numerical("calibration matrix is not positive definite".into())
        })?;
        Ok(Self {
            kind: NormKind::WeightedQuadratic,
            chol: Some(chol),
            scales: None,
        })
    }

    pub fn weighted_euclidean(cal: &WeightCalibration) -> Result<Self> {
        let w = cal
            .mad2
            .clone()
            .ok_or_else(|| AbcError::usage("weighted-euclidean norm needs a MAD calibration"))?;
        Self::weighted_euclidean_from(w)
    }

    pub fn weighted_euclidean_from(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(AbcError::usage("euclidean weights must be positive"));
        }
        Ok(Self {
            kind: NormKind::WeightedEuclidean,
            chol: None,
            scales: Some(weights),
        })
    }

    /// Dimension the norm was calibrated for, if any.
    pub fn calibrated_dim(&self) -> Option<usize> {
        match self.kind {
            NormKind::WeightedQuadratic => self.chol.as_ref().map(|c| c.l_dirty().nrows()),
            NormKind::WeightedEuclidean => self.scales.as_ref().map(Vec::len),
            _ => None,
        }
    }

    pub fn eval(&self, r: &[f64]) -> f64 {
        match self.kind {
            NormKind::WeightedQuadratic => {
                let chol = self.chol.as_ref().expect("calibrated");
                let v = DVector::from_column_slice(r);
                let x = chol.solve(&v);
                v.dot(&x)
            }
            NormKind::WeightedEuclidean => {
                let w = self.scales.as_ref().expect("calibrated");
                r.iter().zip(w).map(|(a, b)| a * a / b).sum::<f64>().sqrt()
            }
            NormKind::Euclidean => r.iter().map(|a| a * a).sum::<f64>().sqrt(),
            NormKind::LInfinity => r.iter().fold(0.0, |m, a| m.max(a.abs())),
        }
    }
}

/// One factor of an acceptance region.
#[derive(Debug, Clone)]
pub struct RegionComponent {
    pub slice: Range<usize>,
    pub norm: Norm,
    pub kernel: Kernel,
}

#[derive(Debug, Clone)]
pub struct AcceptanceRegion {
    pub components: Vec<RegionComponent>,
}

impl AcceptanceRegion {
    pub fn single(slice: Range<usize>, norm: Norm, kernel: Kernel) -> Self {
        Self {
            components: vec![RegionComponent {
                slice,
                norm,
                kernel,
            }],
        }
    }

    /// Parametric factor `(slice_bar, norm_bar, kernel_bar)` times the
    /// predictive factor.
    pub fn dual(bar: RegionComponent, tilde: RegionComponent) -> Self {
        Self {
            components: vec![bar, tilde],
        }
    }

    pub fn is_dual(&self) -> bool {
        self.components.len() == 2
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.kernel.h).collect()
    }

    /// Same region with the first component's threshold replaced.
    pub fn with_primary_threshold(&self, h: f64) -> Self {
        let mut r = self.clone();
        r.components[0].kernel.h = h;
        r
    }

    pub fn all_uniform(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.kernel.kind == KernelKind::Uniform)
    }

    /// Per-component discrepancies `||s_y - s_z||_c`.
    pub fn discrepancies(&self, s_y: &[f64], s_z: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                let r: Vec<f64> = c.slice.clone().map(|i| s_y[i] - s_z[i]).collect();
                c.norm.eval(&r)
            })
            .collect()
    }

    /// Product of kernel values for precomputed discrepancies.
    pub fn weight_of(&self, raw: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(raw)
            .map(|(c, &r)| c.kernel.weight(r))
            .product()
    }

    pub fn validate(&self, summary_dim: usize) -> Result<()> {
        if self.components.is_empty() || self.components.len() > 2 {
            return Err(AbcError::usage("a region has one or two components"));
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.slice.end > summary_dim || c.slice.is_empty() {
                return Err(AbcError::usage(format!(
                    "region component {i} slice {:?} does not fit a summary of dimension {summary_dim}",
                    c.slice
                )));
            }
            if let Some(d) = c.norm.calibrated_dim() {
                if d != c.slice.len() {
                    return Err(AbcError::usage(format!(
                        "region component {i} norm was calibrated for {d} components, slice has {}",
                        c.slice.len()
                    )));
                }
            }
            if !(c.kernel.h >= 0.0) || (c.kernel.kind == KernelKind::Gaussian && c.kernel.h == 0.0)
            {
                return Err(AbcError::usage(format!(
                    "region component {i} has invalid threshold"
                )));
            }
        }
        Ok(())
    }
}

/// `K(s_y, s_z)` with the raw per-component discrepancies.
pub fn kernel_weight(region: &AcceptanceRegion, s_y: &[f64], s_z: &[f64]) -> (f64, Vec<f64>) {
    let raw = region.discrepancies(s_y, s_z);
    (region.weight_of(&raw), raw)
}

/// Threshold accepting a `target` fraction of the pilot discrepancies
/// (type-7 empirical quantile). Infinite entries are allowed.
pub fn tune_threshold(pilot: &[f64], target: f64) -> Result<f64> {
    if pilot.is_empty() {
        return Err(AbcError::usage(
            "threshold tuning needs pilot discrepancies",
        ));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(AbcError::usage("target acceptance must lie in (0, 1)"));
    }
    Ok(stats::quantile(pilot, target))
}

/// Threshold schedules `h_t` for the shrinking-region conditions.
#[derive(Debug, Clone)]
pub enum ThresholdSchedule {
    Single(Vec<f64>),
    Dual { bar: Vec<f64>, tilde: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCheck {
    pub pass: bool,
    pub violating_index: Option<usize>,
    pub message: String,
}

fn strictly_decreasing(h: &[f64], label: &str) -> Result<()> {
    if h.is_empty() {
        return Err(AbcError::usage(format!(
            "{label} threshold sequence is empty"
        )));
    }
    if let Some(i) = h.windows(2).position(|w| !(w[1] < w[0])) {
        return Err(AbcError::usage(format!(
            "{label} threshold sequence is not strictly decreasing at index {}",
            i + 1
        )));
    }
    if h.iter().any(|&v| !(v > 0.0)) {
        return Err(AbcError::usage(format!(
            "{label} thresholds must be positive"
        )));
    }
    Ok(())
}

/// Checks that regions shrink and, for two components, that the thresholds
/// keep a fixed ratio (bounded eccentricity).
pub fn check_region_assumptions(
    region: &AcceptanceRegion,
    schedule: &ThresholdSchedule,
) -> Result<RegionCheck> {
    match schedule {
        ThresholdSchedule::Single(h) => {
            if region.is_dual() {
                return Err(AbcError::usage(
                    "a two-component region needs a dual schedule",
                ));
            }
            strictly_decreasing(h, "single")?;
            Ok(RegionCheck {
                pass: true,
                violating_index: None,
                message: "single threshold decreases".into(),
            })
        }
        ThresholdSchedule::Dual { bar, tilde } => {
            if !region.is_dual() {
                return Err(AbcError::usage(
                    "a dual schedule needs a two-component region",
                ));
            }
            if bar.len() != tilde.len() {
                return Err(AbcError::usage("dual schedules must have equal length"));
            }
            strictly_decreasing(bar, "parametric")?;
            strictly_decreasing(tilde, "predictive")?;
            let r0 = bar[0] / tilde[0];
            for t in 1..bar.len() {
                let r = bar[t] / tilde[t];
                if ((r - r0) / r0).abs() > 1e-9 {
                    return Ok(RegionCheck {
                        pass: false,
                        violating_index: Some(t),
                        message: format!("threshold ratio drifts from {r0} to {r} at index {t}"),
                    });
                }
            }
            Ok(RegionCheck {
                pass: true,
                violating_index: None,
                message: format!("fixed threshold ratio {r0}"),
            })
        }
    }
}
