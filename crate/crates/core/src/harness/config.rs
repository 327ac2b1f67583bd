//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::registry::{registered_ids, REGISTERED};
use crate::error::{AbcError, Result};
use crate::prior::Transform;
use crate::summaries::SUMMARY_IDS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    pub model: ModelConfig,
    pub prior: PriorConfig,
    pub data: DataConfig,
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub prediction: PredictionConfig,
    pub runs: Vec<RunConfig>,
    /// Directory containing the config file; relative data paths resolve
    /// against it.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Markov,
    Ssm,
    Mg1,
    Lv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub theta_true: Vec<f64>,
    pub phi: Option<f64>,
    pub sigma2: Option<f64>,
    pub omega2: Option<f64>,
    pub n: Option<usize>,
    pub horizon: Option<usize>,
    pub n_future: Option<usize>,
    /// `case1`, `case2` or `missing`.
    pub task: Option<String>,
    pub y0: Option<[u64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub transforms: Option<Vec<Transform>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Observation CSV written by the `fixtures` command.
    pub path: Option<PathBuf>,
    pub latent_path: Option<PathBuf>,
    /// Generate the fixture in memory from this seed instead.
    pub fixture_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Rejection,
    Importance,
    Mcmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// Proposals (rejection, importance) or recorded iterations (MCMC).
    pub iterations: usize,
    #[serde(default)]
    pub burn_in: usize,
    /// Used when a run gives no fixed threshold.
    pub target_acceptance: Option<f64>,
    #[serde(default = "pilot_default")]
    pub pilot_iterations: usize,
    #[serde(default = "rounds_default")]
    pub pilot_rounds: usize,
    pub step_scales: Option<Vec<f64>>,
}

fn pilot_default() -> usize {
    40_000
}

fn rounds_default() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionConfig {
    /// Future times written to the draws file and histogrammed. Defaults to
    /// the first, middle and last predicted time.
    pub report_times: Option<Vec<f64>>,
    /// Draws of the ideal predictive (simulation attempts for the gap task).
    pub ideal_draws: Option<usize>,
    /// L-infinity radius of the gap-rejection oracle.
    pub gap_radius: Option<f64>,
    #[serde(default = "bins_default")]
    pub histogram_bins: usize,
}

fn bins_default() -> usize {
    60
}

impl Default for PredictionConfig {
    fn default() -> Self {
        Self {
            report_times: None,
            ideal_draws: None,
            gap_radius: None,
            histogram_bins: bins_default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "standard")]
    Standard,
    P,
    L,
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormName {
    Euclidean,
    LInfinity,
    WeightedQuadratic,
    WeightedEuclidean,
}

impl NormName {
    pub fn needs_calibration(self) -> bool {
        matches!(
            self,
            NormName::WeightedQuadratic | NormName::WeightedEuclidean
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub label: String,
    pub scheme: Scheme,
    /// Label of an earlier run whose parameter draws ABC-F reuses.
    pub source: Option<String>,
    pub summary: Option<String>,
    pub norm: Option<NormName>,
    pub kernel: Option<KernelName>,
    /// Fixed threshold; tuned to the target acceptance when absent.
    pub h: Option<f64>,
    /// Pilot simulations at `theta_true` for weighted norms.
    pub calibration_pilot: Option<usize>,
    /// Threshold of the predictive component; makes the region dual.
    pub h_tilde: Option<f64>,
    pub predictive_norm: Option<NormName>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| AbcError::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AbcError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| AbcError::Parse(format!("config: {e}")))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn param_count(&self) -> Option<usize> {
        Some(match self.model.kind {
            ModelKind::Markov | ModelKind::Ssm => 1,
            ModelKind::Mg1 | ModelKind::Lv => 3,
        })
    }

    /// Checks every field and reports all problems together.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !REGISTERED.contains(&self.id.as_str()) {
            errs.push(format!(
                "unknown experiment id '{}'; registered: {}",
                self.id,
                registered_ids().join(", ")
            ));
        }
        if self.workers == 0 {
            errs.push("workers must be at least 1".into());
        }
        self.validate_model(&mut errs);
        let p = self.param_count().unwrap_or(0);
        if self.model.theta_true.len() != p {
            errs.push(format!("model.theta_true needs {p} values"));
        }
        if self.prior.lower.len() != p || self.prior.upper.len() != p {
            errs.push(format!("prior.lower and prior.upper need {p} values"));
        }
        if let Some(t) = &self.prior.transforms {
            if t.len() != p {
                errs.push(format!("prior.transforms needs {p} entries"));
            }
        }
        for (i, (l, u)) in self.prior.lower.iter().zip(&self.prior.upper).enumerate() {
            if !(l < u) {
                errs.push(format!("prior component {i}: lower must be below upper"));
            }
        }
        if self.data.path.is_none() && self.data.fixture_seed.is_none() {
            errs.push("data needs either path or fixture_seed".into());
        }
        let s = &self.sampler;
        if s.iterations == 0 {
            errs.push("sampler.iterations must be positive".into());
        }
        if let Some(t) = s.target_acceptance {
            if !(t > 0.0 && t < 1.0) {
                errs.push("sampler.target_acceptance must lie in (0, 1)".into());
            }
        }
        if s.pilot_rounds == 0 || s.pilot_iterations < s.pilot_rounds {
            errs.push("sampler.pilot_iterations must be at least pilot_rounds >= 1".into());
        }
        if let Some(st) = &s.step_scales {
            if st.len() != p || st.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                errs.push(format!(
                    "sampler.step_scales needs {p} finite non-negative values"
                ));
            }
        }
        if self.prediction.histogram_bins == 0 {
            errs.push("prediction.histogram_bins must be positive".into());
        }
        if let Some(r) = self.prediction.gap_radius {
            if !(r >= 0.0) {
                errs.push("prediction.gap_radius must be non-negative".into());
            }
        }
        self.validate_runs(&mut errs);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(AbcError::Config(errs))
        }
    }

    fn validate_model(&self, errs: &mut Vec<String>) {
        let m = &self.model;
        let need = |errs: &mut Vec<String>, ok: bool, what: &str| {
            if !ok {
                errs.push(format!(
                    "model.{what} is required for model kind {:?}",
                    m.kind
                ));
            }
        };
        match m.kind {
            ModelKind::Markov => {
                need(errs, m.phi.is_some(), "phi");
                need(errs, m.sigma2.is_some(), "sigma2");
                need(errs, m.n.is_some(), "n");
            }
            ModelKind::Ssm => {
                need(errs, m.phi.is_some(), "phi");
                need(errs, m.sigma2.is_some(), "sigma2");
                need(errs, m.omega2.is_some(), "omega2");
                need(errs, m.n.is_some(), "n");
            }
            ModelKind::Mg1 => {
                need(errs, m.n.is_some(), "n");
                need(errs, m.n_future.is_some(), "n_future");
            }
            ModelKind::Lv => {
                need(errs, m.y0.is_some(), "y0");
                match m.task.as_deref() {
                    Some("case1" | "case2" | "missing") => {}
                    other => errs.push(format!(
                        "model.task must be case1, case2 or missing, got {other:?}"
                    )),
                }
            }
        }
    }

    fn summary_prefix(&self) -> &'static str {
        match self.model.kind {
            ModelKind::Markov => "markov.",
            ModelKind::Ssm => "ssm.",
            ModelKind::Mg1 => "mg1.",
            ModelKind::Lv => "lv.",
        }
    }

    fn validate_runs(&self, errs: &mut Vec<String>) {
        if self.runs.is_empty() {
            errs.push("at least one [[runs]] entry is required".into());
        }
        let target = self.sampler.target_acceptance;
        for (i, r) in self.runs.iter().enumerate() {
            let at = format!("runs[{i}] ('{}')", r.label);
            if r.label.is_empty()
                || !r
                    .label
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            {
                errs.push(format!("{at}: label must be non-empty [A-Za-z0-9_-]"));
            }
            if self.runs[..i].iter().any(|o| o.label == r.label) {
                errs.push(format!("{at}: duplicate label"));
            }
            if r.scheme == Scheme::F {
                match &r.source {
                    Some(src) if self.runs[..i].iter().any(|o| &o.label == src) => {}
                    Some(src) => errs.push(format!("{at}: source '{src}' is not an earlier run")),
                    None => errs.push(format!("{at}: scheme F needs a source run")),
                }
                continue;
            }
            match &r.summary {
                Some(id) if !SUMMARY_IDS.contains(&id.as_str()) => errs.push(format!(
                    "{at}: unknown summary '{id}'; registered: {}",
                    SUMMARY_IDS.join(", ")
                )),
                Some(id) if !id.starts_with(self.summary_prefix()) => errs.push(format!(
                    "{at}: summary '{id}' does not belong to this model"
                )),
                Some(_) => {}
                None => errs.push(format!("{at}: summary is required")),
            }
            if r.norm.is_none() {
                errs.push(format!("{at}: norm is required"));
            }
            let calibrated = r.norm.is_some_and(NormName::needs_calibration)
                || r.predictive_norm.is_some_and(NormName::needs_calibration);
            if calibrated && r.calibration_pilot.is_none() {
                errs.push(format!("{at}: weighted norms need calibration_pilot"));
            }
            match r.h {
                Some(h) if !(h >= 0.0) => errs.push(format!("{at}: h must be non-negative")),
                None if target.is_none() => {
                    errs.push(format!("{at}: give h or sampler.target_acceptance"))
                }
                None if self.sampler.kind == SamplerKind::Importance => {
                    errs.push(format!("{at}: importance sampling needs a fixed h"))
                }
                _ => {}
            }
            match (r.h_tilde, r.predictive_norm) {
                (Some(ht), Some(_)) if !(ht >= 0.0) => {
                    errs.push(format!("{at}: h_tilde must be non-negative"))
                }
                (Some(_), None) => errs.push(format!("{at}: h_tilde needs predictive_norm")),
                (None, Some(_)) => errs.push(format!("{at}: predictive_norm needs h_tilde")),
                _ => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_are_enumerated_together() {
        let text = r#"
            id = "nope"
            seed = 1
            workers = 0
            [model]
            kind = "markov"
            theta_true = [1.0, 2.0]
            [prior]
            lower = [1.0]
            upper = [0.0]
            [data]
            [sampler]
            kind = "mcmc"
            iterations = 0
            [[runs]]
            label = "a"
            scheme = "P"
            summary = "mg1.s0"
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        match cfg.validate() {
            Err(AbcError::Config(errs)) => {
                assert!(errs.len() >= 8, "{errs:?}");
                assert!(errs[0].contains("markov-fig1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "id = \"markov-fig1\"\nseed = 1\nbogus = 2\n";
        assert!(matches!(
            ExperimentConfig::from_toml(text),
            Err(AbcError::Parse(_))
        ));
    }
}
