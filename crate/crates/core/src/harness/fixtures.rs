//! Observed-data fixtures: simulated at `theta_true` from a fixed seed.

use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::output::{fmt_f64, write_csv};
use super::registry::canonical_config;
use super::setup::{theta_true, BuiltModel};
use crate::error::{AbcError, Result};
use crate::models::SimRequest;
use crate::rng::{stream, streams};
use crate::types::TimeSeriesData;

#[derive(Debug, Clone)]
pub struct Fixture {
    /// What the samplers see; never carries latents.
    pub observed: TimeSeriesData,
    /// True latent track at the observed times.
    pub latent: Option<TimeSeriesData>,
    /// True values of the predicted quantities.
    pub truth: Option<TimeSeriesData>,
}

#[derive(Debug, Clone)]
pub struct FixturePaths {
    pub observed: PathBuf,
    pub latent: Option<PathBuf>,
    pub truth: Option<PathBuf>,
}

/// Simulates the fixture for `model` at `cfg`'s true parameter.
pub fn make_fixture(cfg: &ExperimentConfig, model: &BuiltModel, seed: u64) -> Result<Fixture> {
    let theta = theta_true(cfg, model)?;
    let sim = model.simulator();
    let mut rng = stream(seed, streams::FIXTURE);
    let out = sim.simulate(theta.values(), SimRequest::Joint, &mut rng)?;
    if out.truncated {
        return Err(AbcError::Numerical(format!(
            "fixture simulation for '{}' hit a simulator cap; choose another seed",
            cfg.id
        )));
    }
    let o = out.observed;
    let observed = TimeSeriesData::new(o.times().to_vec(), o.width(), o.values().to_vec())?;
    let latent = match o.latents() {
        Some(l) => Some(TimeSeriesData::new(
            o.times().to_vec(),
            o.latent_width(),
            l.to_vec(),
        )?),
        None => None,
    };
    Ok(Fixture {
        observed,
        latent,
        truth: out.future,
    })
}

fn series_rows(d: &TimeSeriesData) -> Vec<Vec<String>> {
    (0..d.len())
        .map(|i| {
            std::iter::once(fmt_f64(d.times()[i]))
                .chain(d.record(i).iter().map(|&v| fmt_f64(v)))
                .collect()
        })
        .collect()
}

fn write_series(path: &Path, labels: &[String], d: &TimeSeriesData) -> Result<()> {
    let mut header = vec!["time".to_string()];
    header.extend(labels.iter().cloned());
    write_csv(path, &header, &series_rows(d))
}

pub fn write_fixture(
    fixture: &Fixture,
    model: &BuiltModel,
    dir: &Path,
    id: &str,
) -> Result<FixturePaths> {
    std::fs::create_dir_all(dir).map_err(|e| AbcError::io(dir, e))?;
    let observed = dir.join(format!("{id}.obs.csv"));
    write_series(&observed, &model.observed_labels(), &fixture.observed)?;
    let latent = match &fixture.latent {
        Some(l) => {
            let p = dir.join(format!("{id}.latent.csv"));
            write_series(&p, &model.latent_labels(), l)?;
            Some(p)
        }
        None => None,
    };
    let truth = match &fixture.truth {
        Some(t) => {
            let p = dir.join(format!("{id}.future.csv"));
            write_series(&p, &model.simulator().future_labels(), t)?;
            Some(p)
        }
        None => None,
    };
    Ok(FixturePaths {
        observed,
        latent,
        truth,
    })
}

/// Reads a series written by [`write_fixture`].
pub fn read_series(path: &Path) -> Result<TimeSeriesData> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| AbcError::Parse(format!("{}: {e}", path.display())))?;
    let width = rdr
        .headers()
        .map_err(|e| AbcError::Parse(format!("{}: {e}", path.display())))?
        .len()
        .checked_sub(1)
        .filter(|w| *w > 0)
        .ok_or_else(|| {
            AbcError::Parse(format!("{}: need a time column and data", path.display()))
        })?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| AbcError::Parse(format!("{}: {e}", path.display())))?;
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| {
                AbcError::Parse(format!(
                    "{}: row {}: '{s}' is not a number",
                    path.display(),
                    i + 1
                ))
            })
        };
        times.push(parse(&rec[0])?);
        for j in 1..=width {
            values.push(parse(rec.get(j).unwrap_or(""))?);
        }
    }
    TimeSeriesData::new(times, width, values)
}

/// Writes the fixture of a registered experiment.
pub fn generate_fixture(id: &str, seed: u64, dir: &Path) -> Result<FixturePaths> {
    let cfg = canonical_config(id)?;
    let model = BuiltModel::from_config(&cfg.model)?;
    let f = make_fixture(&cfg, &model, seed)?;
    write_fixture(&f, &model, dir, id)
}

/// The fixture a config points at: a file, or simulated from its seed.
pub fn load_fixture(cfg: &ExperimentConfig, model: &BuiltModel) -> Result<Fixture> {
    match (&cfg.data.path, cfg.data.fixture_seed) {
        (Some(p), _) => {
            let observed = read_series(&cfg.resolve(p))?;
            let latent = match &cfg.data.latent_path {
                Some(lp) => Some(read_series(&cfg.resolve(lp))?),
                None => None,
            };
            Ok(Fixture {
                observed,
                latent,
                truth: None,
            })
        }
        (None, Some(seed)) => make_fixture(cfg, model, seed),
        (None, None) => Err(AbcError::Config(vec![
            "data needs either path or fixture_seed".into(),
        ])),
    }
}
