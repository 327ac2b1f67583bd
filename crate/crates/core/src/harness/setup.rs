//! Building models and priors from a config.

use std::sync::Arc;

use super::config::{ExperimentConfig, ModelConfig, ModelKind};
use crate::error::{AbcError, Result};
use crate::models::{
    GaussianMarkovModel, LinearGaussianSsm, LotkaVolterraModel, LvTask, Mg1Model, Simulator,
};
use crate::prior::{Prior, Transform};
use crate::summaries::SummaryContext;
use crate::types::{ParamVector, TimeSeriesData};

/// A configured model, kept concrete so oracles can reach its constants.
#[derive(Debug, Clone)]
pub enum BuiltModel {
    Markov(GaussianMarkovModel),
    Ssm(LinearGaussianSsm),
    Mg1(Mg1Model),
    Lv(LotkaVolterraModel),
}

impl BuiltModel {
    pub fn from_config(m: &ModelConfig) -> Result<Self> {
        let req = |v: Option<f64>, what: &str| {
            v.ok_or_else(|| AbcError::Config(vec![format!("model.{what} is required")]))
        };
        let n = || {
            m.n.ok_or_else(|| AbcError::Config(vec!["model.n is required".into()]))
        };
        Ok(match m.kind {
            ModelKind::Markov => BuiltModel::Markov(GaussianMarkovModel::new(
                req(m.phi, "phi")?,
                req(m.sigma2, "sigma2")?,
                n()?,
                m.horizon.unwrap_or(1),
            )?),
            ModelKind::Ssm => BuiltModel::Ssm(LinearGaussianSsm::new(
                req(m.phi, "phi")?,
                req(m.sigma2, "sigma2")?,
                req(m.omega2, "omega2")?,
                n()?,
                m.horizon.unwrap_or(1),
            )?),
            ModelKind::Mg1 => BuiltModel::Mg1(Mg1Model::new(n()?, m.n_future.unwrap_or(1))?),
            ModelKind::Lv => {
                let task = match m.task.as_deref() {
                    Some("case1") => LvTask::Case1,
                    Some("case2") => LvTask::Case2,
                    Some("missing") => LvTask::Missing,
                    other => {
                        return Err(AbcError::Config(vec![format!("unknown LV task {other:?}")]))
                    }
                };
                let y0 =
                    m.y0.ok_or_else(|| AbcError::Config(vec!["model.y0 is required".into()]))?;
                BuiltModel::Lv(LotkaVolterraModel::new(task, y0))
            }
        })
    }

    pub fn shared(&self) -> Arc<dyn Simulator> {
        match self {
            BuiltModel::Markov(m) => Arc::new(m.clone()),
            BuiltModel::Ssm(m) => Arc::new(m.clone()),
            BuiltModel::Mg1(m) => Arc::new(m.clone()),
            BuiltModel::Lv(m) => Arc::new(m.clone()),
        }
    }

    pub fn simulator(&self) -> &dyn Simulator {
        match self {
            BuiltModel::Markov(m) => m,
            BuiltModel::Ssm(m) => m,
            BuiltModel::Mg1(m) => m,
            BuiltModel::Lv(m) => m,
        }
    }

    /// Column labels of one observed record.
    pub fn observed_labels(&self) -> Vec<String> {
        match self {
            BuiltModel::Lv(m) if m.task != LvTask::Case2 => vec!["prey".into(), "predator".into()],
            BuiltModel::Lv(_) => vec!["prey".into()],
            _ => vec!["y".into()],
        }
    }

    /// Column labels of the latent track, if the model has one.
    pub fn latent_labels(&self) -> Vec<String> {
        match self {
            BuiltModel::Ssm(_) => vec!["v".into()],
            BuiltModel::Mg1(_) => vec!["v".into(), "waiting".into()],
            BuiltModel::Lv(m) if m.task == LvTask::Case2 => vec!["predator".into()],
            _ => Vec::new(),
        }
    }

    /// Latent conditioning vector recovered from an observed series and its
    /// true latent track.
    pub fn latent_state(
        &self,
        observed: &TimeSeriesData,
        track: Option<&TimeSeriesData>,
    ) -> Option<Vec<f64>> {
        match self {
            BuiltModel::Markov(_) => Some(Vec::new()),
            BuiltModel::Lv(m) if m.task == LvTask::Case1 => Some(Vec::new()),
            BuiltModel::Lv(m) if m.task == LvTask::Missing => None,
            BuiltModel::Mg1(_) => {
                let last = track?.last_record()?;
                Some(vec![observed.values().iter().sum(), last[0]])
            }
            _ => Some(vec![track?.last_record()?[0]]),
        }
    }

    pub fn summary_context(&self, observed: &TimeSeriesData) -> SummaryContext {
        match self {
            BuiltModel::Markov(m) => SummaryContext {
                phi: Some(m.phi),
                ..Default::default()
            },
            BuiltModel::Ssm(m) => SummaryContext {
                ssm: Some((m.phi, m.sigma2, m.omega2, m.n)),
                ..Default::default()
            },
            _ => SummaryContext {
                reference: Some(observed.clone()),
                ..Default::default()
            },
        }
    }
}

pub fn build_prior(cfg: &ExperimentConfig, names: Arc<[String]>) -> Result<Prior> {
    let p = cfg.prior.lower.len();
    let transforms = cfg
        .prior
        .transforms
        .clone()
        .unwrap_or_else(|| vec![Transform::Identity; p]);
    Prior::new(
        cfg.prior.lower.clone(),
        cfg.prior.upper.clone(),
        transforms,
        names,
    )
}

pub fn theta_true(cfg: &ExperimentConfig, model: &BuiltModel) -> Result<ParamVector> {
    ParamVector::new(
        cfg.model.theta_true.clone(),
        model.simulator().param_names(),
    )
}
