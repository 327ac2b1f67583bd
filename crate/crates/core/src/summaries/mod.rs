//! Summary statistics `s(y) = (s_bar(y), s_tilde(y))`.
//!
//! The parametric part `s_bar` targets `theta`; the optional predictive part
//! `s_tilde` targets the future and is matched by its own threshold.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{AbcError, Result};
use crate::oracles::ssm::SsmMatrices;
use crate::stats;
use crate::types::TimeSeriesData;

mod calibration;

pub use calibration::{
    calibrate_from_vectors, calibrate_weights, CalibrationMethod, WeightCalibration,
};

/// Quantile levels behind the M/G/1 run-index statistics.
pub const MG1_RUN_LEVELS: [f64; 3] = [0.7, 0.8, 0.9];

pub type SummaryFn = Arc<dyn Fn(&TimeSeriesData) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum SummaryKind {
    /// `y_bar_phi`
    MarkovS1 {
        phi: f64,
    },
    /// `(y_bar_phi, y_n)`
    MarkovS2 {
        phi: f64,
    },
    /// `y_ring_phi = y_bar_phi + phi y_n`
    MarkovS3 {
        phi: f64,
    },
    /// Linear statistics `w_k . y` of the state-space model.
    SsmLinear {
        weights: Vec<Vec<f64>>,
    },
    /// Quartiles, min and max of interdeparture times.
    Mg1S0,
    /// `Mg1S0` plus the last indices exceeding fixed thresholds.
    Mg1S1 {
        thresholds: [f64; 3],
    },
    /// Mean, sd, two autocorrelations of each population and their
    /// cross-correlation; optionally the final record.
    LvBoth {
        with_last: bool,
    },
    /// Prey-only restriction of `LvBoth`.
    LvPrey {
        with_last: bool,
    },
    /// Block means and sds around a gap plus the records at its edges.
    LvMissing {
        block: usize,
    },
    Custom(SummaryFn),
}

impl fmt::Debug for SummaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SummaryKind::MarkovS1 { phi } => write!(f, "MarkovS1({phi})"),
            SummaryKind::MarkovS2 { phi } => write!(f, "MarkovS2({phi})"),
            SummaryKind::MarkovS3 { phi } => write!(f, "MarkovS3({phi})"),
            SummaryKind::SsmLinear { weights } => write!(f, "SsmLinear({})", weights.len()),
            SummaryKind::Mg1S0 => write!(f, "Mg1S0"),
            SummaryKind::Mg1S1 { thresholds } => write!(f, "Mg1S1({thresholds:?})"),
            SummaryKind::LvBoth { with_last } => write!(f, "LvBoth({with_last})"),
            SummaryKind::LvPrey { with_last } => write!(f, "LvPrey({with_last})"),
            SummaryKind::LvMissing { block } => write!(f, "LvMissing({block})"),
            SummaryKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SummarySpec {
    pub id: String,
    pub parametric_dim: usize,
    pub predictive_dim: usize,
    pub kind: SummaryKind,
    /// Data that relative statistics were derived from (e.g. observed
    /// quantiles in the M/G/1 run indices).
    pub reference_data: Option<TimeSeriesData>,
}

/// Model constants some statistics depend on.
#[derive(Debug, Clone, Default)]
pub struct SummaryContext {
    pub phi: Option<f64>,
    /// `(phi, sigma2, omega2, n)` of the state-space model.
    pub ssm: Option<(f64, f64, f64, usize)>,
    pub reference: Option<TimeSeriesData>,
}

/// Ids accepted by [`SummarySpec::from_id`].
pub const SUMMARY_IDS: &[&str] = &[
    "markov.s1",
    "markov.s2",
    "markov.s3",
    "ssm.s1",
    "ssm.s2",
    "ssm.s12",
    "mg1.s0",
    "mg1.s1",
    "lv.s0.case1",
    "lv.s1.case1",
    "lv.s0.case2",
    "lv.s1.case2",
    "lv.missing",
];

impl SummarySpec {
    pub fn new(id: &str, parametric_dim: usize, predictive_dim: usize, kind: SummaryKind) -> Self {
        Self {
            id: id.to_string(),
            parametric_dim,
            predictive_dim,
            kind,
            reference_data: None,
        }
    }

    pub fn custom(
        id: &str,
        parametric_dim: usize,
        predictive_dim: usize,
        f: impl Fn(&TimeSeriesData) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            id,
            parametric_dim,
            predictive_dim,
            SummaryKind::Custom(Arc::new(f)),
        )
    }

    pub fn dim(&self) -> usize {
        self.parametric_dim + self.predictive_dim
    }

    pub fn parametric_range(&self) -> Range<usize> {
        0..self.parametric_dim
    }

    pub fn predictive_range(&self) -> Range<usize> {
        self.parametric_dim..self.dim()
    }

    /// Builds a registered statistic.
    pub fn from_id(id: &str, ctx: &SummaryContext) -> Result<Self> {
        let need_phi = || {
            ctx.phi
                .ok_or_else(|| AbcError::usage(format!("summary '{id}' needs the model's phi")))
        };
        let ssm = || {
            let (phi, s2, o2, n) = ctx.ssm.ok_or_else(|| {
                AbcError::usage(format!("summary '{id}' needs the state-space constants"))
            })?;
            SsmMatrices::new(phi, s2, o2, n)
        };
        let spec = match id {
            "markov.s1" => Self::new(id, 1, 0, SummaryKind::MarkovS1 { phi: need_phi()? }),
            "markov.s2" => Self::new(id, 2, 0, SummaryKind::MarkovS2 { phi: need_phi()? }),
            "markov.s3" => Self::new(id, 1, 0, SummaryKind::MarkovS3 { phi: need_phi()? }),
            "ssm.s1" => {
                let m = ssm()?;
                Self::new(
                    id,
                    1,
                    0,
                    SummaryKind::SsmLinear {
                        weights: vec![m.s1_weights()],
                    },
                )
            }
            "ssm.s2" => {
                let m = ssm()?;
                Self::new(
                    id,
                    1,
                    0,
                    SummaryKind::SsmLinear {
                        weights: vec![m.s2_weights()],
                    },
                )
            }
            "ssm.s12" => {
                let m = ssm()?;
                Self::new(
                    id,
                    2,
                    0,
                    SummaryKind::SsmLinear {
                        weights: vec![m.s1_weights(), m.s2_weights()],
                    },
                )
            }
            "mg1.s0" => Self::new(id, 5, 0, SummaryKind::Mg1S0),
            "mg1.s1" => {
                let reference = ctx.reference.clone().ok_or_else(|| {
                    AbcError::usage("summary 'mg1.s1' needs the observed data as reference")
                })?;
                let y = reference.values();
                let thresholds = MG1_RUN_LEVELS.map(|a| stats::quantile(y, a));
                let mut s = Self::new(id, 5, 3, SummaryKind::Mg1S1 { thresholds });
                s.reference_data = Some(reference);
                s
            }
            "lv.s0.case1" => Self::new(id, 9, 0, SummaryKind::LvBoth { with_last: false }),
            "lv.s1.case1" => Self::new(id, 9, 2, SummaryKind::LvBoth { with_last: true }),
            "lv.s0.case2" => Self::new(id, 4, 0, SummaryKind::LvPrey { with_last: false }),
            "lv.s1.case2" => Self::new(id, 4, 1, SummaryKind::LvPrey { with_last: true }),
            "lv.missing" => Self::new(id, 8, 4, SummaryKind::LvMissing { block: 51 }),
            _ => {
                return Err(AbcError::usage(format!(
                    "unknown summary '{id}'; registered: {}",
                    SUMMARY_IDS.join(", ")
                )))
            }
        };
        Ok(spec)
    }
}

/// Weighted average `((1 - phi) sum_{i<n} y_i + y_n) / n`.
pub fn markov_ybar(y: &[f64], phi: f64) -> f64 {
    let n = y.len();
    let head: f64 = y[..n - 1].iter().sum();
    ((1.0 - phi) * head + y[n - 1]) / n as f64
}

/// Largest 1-based index with `y_i >= q`, or 1 when there is none.
pub fn last_exceedance(y: &[f64], q: f64) -> f64 {
    y.iter()
        .rposition(|&v| v >= q)
        .map_or(1.0, |i| (i + 1) as f64)
}

fn lv_block(prey: &[f64], pred: Option<&[f64]>, out: &mut Vec<f64>) {
    out.push(stats::mean(prey));
    if let Some(p) = pred {
        out.push(stats::mean(p));
    }
    out.push(stats::sd(prey));
    if let Some(p) = pred {
        out.push(stats::sd(p));
    }
}

fn check_width(
    spec: &SummarySpec,
    data: &TimeSeriesData,
    width: usize,
    min_len: usize,
) -> Result<()> {
    if data.width() != width || data.len() < min_len {
        return Err(AbcError::usage(format!(
            "summary '{}' needs records of width {width} and at least {min_len} of them, got {} of width {}",
            spec.id,
            data.len(),
            data.width()
        )));
    }
    Ok(())
}

/// Evaluates `s(data)`, parametric part first.
pub fn compute_summary(spec: &SummarySpec, data: &TimeSeriesData) -> Result<Vec<f64>> {
    let out = match &spec.kind {
        SummaryKind::MarkovS1 { phi } => {
            check_width(spec, data, 1, 1)?;
            vec![markov_ybar(data.values(), *phi)]
        }
        SummaryKind::MarkovS2 { phi } => {
            check_width(spec, data, 1, 1)?;
            let y = data.values();
            vec![markov_ybar(y, *phi), y[y.len() - 1]]
        }
        SummaryKind::MarkovS3 { phi } => {
            check_width(spec, data, 1, 1)?;
            let y = data.values();
            vec![markov_ybar(y, *phi) + phi * y[y.len() - 1]]
        }
        SummaryKind::SsmLinear { weights } => {
            let n = weights[0].len();
            check_width(spec, data, 1, n)?;
            if data.len() != n {
                return Err(AbcError::usage(format!(
                    "summary '{}' was built for n = {n}, data has {}",
                    spec.id,
                    data.len()
                )));
            }
            let y = data.values();
            weights
                .iter()
                .map(|w| w.iter().zip(y).map(|(a, b)| a * b).sum())
                .collect()
        }
        SummaryKind::Mg1S0 | SummaryKind::Mg1S1 { .. } => {
            check_width(spec, data, 1, 1)?;
            let y = data.values();
            let mut sorted = y.to_vec();
            sorted.sort_by(f64::total_cmp);
            let mut out = vec![
                stats::quantile_sorted(&sorted, 0.25),
                stats::quantile_sorted(&sorted, 0.5),
                stats::quantile_sorted(&sorted, 0.75),
                sorted[0],
                sorted[sorted.len() - 1],
            ];
            if let SummaryKind::Mg1S1 { thresholds } = &spec.kind {
                out.extend(thresholds.iter().map(|&q| last_exceedance(y, q)));
            }
            out
        }
        SummaryKind::LvBoth { with_last } => {
            check_width(spec, data, 2, 3)?;
            let prey = data.component(0);
            let pred = data.component(1);
            let mut out = Vec::with_capacity(11);
            lv_block(&prey, Some(&pred), &mut out);
            for s in [&prey, &pred] {
                out.push(stats::autocorrelation(s, 1));
                out.push(stats::autocorrelation(s, 2));
            }
            out.push(stats::cross_correlation(&prey, &pred));
            if *with_last {
                out.extend_from_slice(data.last_record().expect("nonempty"));
            }
            out
        }
        SummaryKind::LvPrey { with_last } => {
            check_width(spec, data, 1, 3)?;
            let prey = data.values();
            let mut out = Vec::with_capacity(5);
            lv_block(prey, None, &mut out);
            out.push(stats::autocorrelation(prey, 1));
            out.push(stats::autocorrelation(prey, 2));
            if *with_last {
                out.push(prey[prey.len() - 1]);
            }
            out
        }
        SummaryKind::LvMissing { block } => {
            let b = *block;
            check_width(spec, data, 2, 2 * b)?;
            if data.len() != 2 * b {
                return Err(AbcError::usage(format!(
                    "summary '{}' needs two blocks of {b} records",
                    spec.id
                )));
            }
            let prey = data.component(0);
            let pred = data.component(1);
            let mut out = Vec::with_capacity(12);
            for r in [0..b, b..2 * b] {
                out.push(stats::mean(&prey[r.clone()]));
                out.push(stats::sd(&prey[r.clone()]));
                out.push(stats::mean(&pred[r.clone()]));
                out.push(stats::sd(&pred[r]));
            }
            out.extend_from_slice(data.record(b - 1));
            out.extend_from_slice(data.record(b));
            out
        }
        SummaryKind::Custom(f) => f(data),
    };
    if out.len() != spec.dim() {
        return Err(AbcError::Invariant(format!(
            "summary '{}' produced {} values, expected {}",
            spec.id,
            out.len(),
            spec.dim()
        )));
    }
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(AbcError::Numerical(format!(
            "summary '{}' component {i} is not finite",
            spec.id
        )));
    }
    Ok(out)
}
