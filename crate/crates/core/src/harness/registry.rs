//! The registered experiments and their canonical configs.

use super::config::ExperimentConfig;
use crate::error::{AbcError, Result};

pub const REGISTERED: &[&str] = &[
    "markov-fig1",
    "markov-appendix",
    "mg1-varying",
    "mg1-growing",
    "lv-pred-case1",
    "lv-pred-case2",
    "lv-missing",
];

const CONFIGS: &[(&str, &str, &str)] = &[
    (
        "markov-fig1",
        "AR(1) chain, phi = 0.5: posterior of c and ABC-P predictives under three summaries",
        include_str!("../../../../configs/markov-fig1.toml"),
    ),
    (
        "markov-appendix",
        "the same with phi = 0.99",
        include_str!("../../../../configs/markov-appendix.toml"),
    ),
    (
        "mg1-varying",
        "M/G/1 queue, theta = (4, 7, 0.15): ABC-P and ABC-L waiting-time predictions",
        include_str!("../../../../configs/mg1-varying.toml"),
    ),
    (
        "mg1-growing",
        "M/G/1 queue, theta = (8, 16, 0.15): growing queue",
        include_str!("../../../../configs/mg1-growing.toml"),
    ),
    (
        "lv-pred-case1",
        "Lotka-Volterra forecast, both populations observed: ABC-P and ABC-F",
        include_str!("../../../../configs/lv-pred-case1.toml"),
    ),
    (
        "lv-pred-case2",
        "Lotka-Volterra forecast, prey observed: ABC-P and ABC-L",
        include_str!("../../../../configs/lv-pred-case2.toml"),
    ),
    (
        "lv-missing",
        "Lotka-Volterra gap filling between two observation blocks: ABC-P",
        include_str!("../../../../configs/lv-missing.toml"),
    ),
];

pub fn registered_ids() -> Vec<&'static str> {
    REGISTERED.to_vec()
}

/// `(id, description)` pairs.
pub fn list_experiments() -> Vec<(&'static str, &'static str)> {
    CONFIGS.iter().map(|(id, d, _)| (*id, *d)).collect()
}

/// Shipped config text for `id`.
pub fn canonical_config_text(id: &str) -> Result<&'static str> {
    CONFIGS
        .iter()
        .find(|(i, _, _)| *i == id)
        .map(|(_, _, t)| *t)
        .ok_or_else(|| {
            AbcError::Config(vec![format!(
                "unknown experiment id '{id}'; registered: {}",
                REGISTERED.join(", ")
            )])
        })
}

pub fn canonical_config(id: &str) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::from_toml(canonical_config_text(id)?)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_shipped_config_validates() {
        for id in REGISTERED {
            let cfg = canonical_config(id).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert_eq!(cfg.id, *id);
        }
    }

    #[test]
    fn unknown_id_lists_registered() {
        let e = canonical_config("nope").unwrap_err().to_string();
        assert!(e.contains("lv-missing"));
    }
}
