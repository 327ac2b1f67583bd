//! Running a configured experiment end to end.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, KernelName, NormName, RunConfig, SamplerKind, Scheme};
use super::fixtures::{load_fixture, Fixture};
use super::output::{
    fmt_f64, histogram, prediction_column, quantile_table, write_csv, write_histogram, write_json,
    write_quantiles, QuantileRow,
};
use super::setup::{build_prior, theta_true, BuiltModel};
use crate::discrepancy::{AcceptanceRegion, Kernel, Norm, RegionComponent};
use crate::error::{AbcError, Result};
use crate::models::LvTask;
use crate::oracles::{
    ideal_predictive, lv_gap_ideal, markov_c_posterior, markov_predictive, ssm_posteriors,
    MarkovVariant,
};
use crate::rng::{stream, streams};
use crate::samplers::{
    abc_f_predict, abc_importance, abc_l_predict, abc_mcmc, abc_rejection, tune_mcmc_threshold,
    tune_rejection_threshold, AbcProblem, McmcSettings, Mode, SamplerReport, TuneRound,
    TuneSettings,
};
use crate::summaries::{calibrate_weights, CalibrationMethod};
use crate::summaries::{markov_ybar, SummarySpec};
use crate::types::{TimeSeriesData, WeightedDraw};

/// Command-line overrides of a config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Replaces `sampler.iterations` (scaled-down reruns).
    pub iterations: Option<usize>,
    /// Replaces `prediction.ideal_draws`.
    pub ideal_draws: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationInfo {
    pub component: usize,
    pub method: String,
    pub n_pilot: usize,
    pub jittered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub experiment: String,
    pub label: String,
    pub scheme: Scheme,
    pub summary: Option<String>,
    pub source: Option<String>,
    pub sampler: SamplerKind,
    pub seed: u64,
    pub run_seed: u64,
    pub workers: usize,
    pub iterations: u64,
    pub burn_in: usize,
    pub acceptance_rate: f64,
    pub target_acceptance: Option<f64>,
    /// Achieved rate within `[0.5, 2]` times the target.
    pub within_target_band: Option<bool>,
    pub ess: Option<f64>,
    pub n_simulations: u64,
    pub n_conditional_simulations: u64,
    pub thresholds: Vec<f64>,
    pub tuning: Vec<TuneRound>,
    /// Random-walk steps of the MCMC chain; `None` means the defaults.
    pub step_scales: Option<Vec<f64>>,
    pub calibration: Vec<CalibrationInfo>,
    pub unique_draws: usize,
    pub total_mass: f64,
    pub min_discrepancy: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub label: String,
    pub scheme: Scheme,
    pub report: SamplerReport,
    /// The problem the draws were sampled under.
    pub problem: AbcProblem,
    pub quantiles: Vec<QuantileRow>,
    pub metadata: RunMetadata,
}

impl RunResult {
    /// Predicted values at future index `i`, component `c`, with masses.
    pub fn prediction(&self, i: usize, c: usize) -> (Vec<f64>, Vec<f64>) {
        self.report.prediction_column(i, c)
    }
}

#[derive(Debug, Clone)]
pub struct IdealBundle {
    pub draws: Vec<TimeSeriesData>,
    pub quantiles: Vec<QuantileRow>,
    pub attempts: usize,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub config: ExperimentConfig,
    pub model: BuiltModel,
    pub fixture: Fixture,
    pub runs: Vec<RunResult>,
    pub ideal: Option<IdealBundle>,
    pub ideal_error: Option<String>,
    pub oracle: Option<serde_json::Value>,
    pub report_indices: Vec<usize>,
    pub wall_seconds: Vec<(String, f64)>,
}

impl ResultBundle {
    pub fn run(&self, label: &str) -> Option<&RunResult> {
        self.runs.iter().find(|r| r.label == label)
    }
}

fn run_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn mode_of(s: Scheme) -> Mode {
    match s {
        Scheme::Standard | Scheme::F => Mode::Standard,
        Scheme::P => Mode::Predictive,
        Scheme::L => Mode::Latent,
    }
}

/// Indices of the future times nearest to the requested report times.
fn report_indices(times: &[f64], wanted: Option<&[f64]>) -> Vec<usize> {
    if times.is_empty() {
        return Vec::new();
    }
    match wanted {
        Some(w) => w
            .iter()
            .map(|t| {
                (0..times.len())
                    .min_by(|&a, &b| (times[a] - t).abs().total_cmp(&(times[b] - t).abs()))
                    .unwrap()
            })
            .collect(),
        None => {
            let mut v = vec![0, times.len() / 2, times.len() - 1];
            v.dedup();
            v
        }
    }
}

struct Built {
    region: AcceptanceRegion,
    calibration: Vec<CalibrationInfo>,
}

fn build_norm(
    name: NormName,
    component: usize,
    ctx: &NormContext<'_>,
    slice: std::ops::Range<usize>,
    rng: &mut crate::rng::SimRng,
    info: &mut Vec<CalibrationInfo>,
) -> Result<Norm> {
    let method = match name {
        NormName::Euclidean => return Ok(Norm::euclidean()),
        NormName::LInfinity => return Ok(Norm::l_infinity()),
        NormName::WeightedQuadratic => CalibrationMethod::Covariance,
        NormName::WeightedEuclidean => CalibrationMethod::Mad,
    };
    let n_pilot = ctx.run.calibration_pilot.unwrap_or(1000);
    let cal = calibrate_weights(
        ctx.model.simulator(),
        ctx.theta,
        ctx.spec,
        slice,
        method,
        n_pilot,
        rng,
    )?;
    info.push(CalibrationInfo {
        component,
        method: format!("{method:?}").to_lowercase(),
        n_pilot,
        jittered: cal.jittered,
    });
    match method {
        CalibrationMethod::Covariance => Norm::weighted_quadratic(&cal),
        CalibrationMethod::Mad => Norm::weighted_euclidean(&cal),
    }
}

struct NormContext<'a> {
    run: &'a RunConfig,
    model: &'a BuiltModel,
    spec: &'a SummarySpec,
    theta: &'a crate::types::ParamVector,
}

fn build_region(ctx: &NormContext<'_>, seed: u64) -> Result<Built> {
    let run = ctx.run;
    let spec = ctx.spec;
    let mut rng = stream(seed, streams::CALIBRATION);
    let mut info = Vec::new();
    let h = run.h.unwrap_or(f64::INFINITY);
    let kernel = match run.kernel.unwrap_or(KernelName::Uniform) {
        KernelName::Uniform => Kernel::uniform(h),
        KernelName::Gaussian => Kernel::gaussian(h),
    };
    let norm_name = run.norm.unwrap_or(NormName::Euclidean);
    let region = match (run.h_tilde, run.predictive_norm) {
        (Some(ht), Some(pn)) => {
            if spec.predictive_dim == 0 {
                return Err(AbcError::Config(vec![format!(
                    "run '{}': summary '{}' has no predictive part for h_tilde",
                    run.label, spec.id
                )]));
            }
            let bar = RegionComponent {
                slice: spec.parametric_range(),
                norm: build_norm(
                    norm_name,
                    0,
                    ctx,
                    spec.parametric_range(),
                    &mut rng,
                    &mut info,
                )?,
                kernel,
            };
            let tilde = RegionComponent {
                slice: spec.predictive_range(),
                norm: build_norm(pn, 1, ctx, spec.predictive_range(), &mut rng, &mut info)?,
                kernel: Kernel::uniform(ht),
            };
            AcceptanceRegion::dual(bar, tilde)
        }
        _ => AcceptanceRegion::single(
            0..spec.dim(),
            build_norm(norm_name, 0, ctx, 0..spec.dim(), &mut rng, &mut info)?,
            kernel,
        ),
    };
    Ok(Built {
        region,
        calibration: info,
    })
}

struct Sampled {
    report: SamplerReport,
    problem: AbcProblem,
    tuning: Vec<TuneRound>,
    step_scales: Option<Vec<f64>>,
}

impl Sampled {
    fn plain(report: SamplerReport, problem: AbcProblem) -> Self {
        Self {
            report,
            problem,
            tuning: Vec::new(),
            step_scales: None,
        }
    }
}

fn sample(
    cfg: &ExperimentConfig,
    run: &RunConfig,
    problem: AbcProblem,
    seed: u64,
    workers: usize,
) -> Result<Sampled> {
    let s = &cfg.sampler;
    let mode = mode_of(run.scheme);
    let target = s.target_acceptance.unwrap_or(0.1);
    match s.kind {
        SamplerKind::Mcmc => {
            let mut settings = McmcSettings::new(s.iterations, s.burn_in);
            settings.step_scales = s.step_scales.clone();
            let (problem, rounds) = if run.h.is_some() {
                (problem, Vec::new())
            } else {
                let mut ts = TuneSettings::new(target);
                ts.rounds = s.pilot_rounds;
                ts.pilot_iterations = s.pilot_iterations;
                ts.step_scales = s.step_scales.clone();
                let tuned = tune_mcmc_threshold(&problem, &ts, seed)?;
                settings.init = tuned.init();
                settings.step_scales = Some(tuned.step_scales.clone());
                (problem.with_region(tuned.region.clone())?, tuned.rounds)
            };
            let report = abc_mcmc(&problem, &settings, mode, seed)?;
            Ok(Sampled {
                report,
                problem,
                tuning: rounds,
                step_scales: settings.step_scales,
            })
        }
        SamplerKind::Rejection => {
            let problem = match run.h {
                Some(_) => problem,
                None => {
                    let h = tune_rejection_threshold(
                        &problem,
                        target,
                        s.pilot_iterations,
                        seed,
                        workers,
                    )?;
                    let r = problem.region.with_primary_threshold(h);
                    problem.with_region(r)?
                }
            };
            let report = abc_rejection(&problem, s.iterations, mode, seed, workers)?;
            Ok(Sampled::plain(report, problem))
        }
        SamplerKind::Importance => {
            let q = problem.prior.clone();
            let report = abc_importance(&problem, &q, s.iterations, mode, seed, workers)?;
            Ok(Sampled::plain(report, problem))
        }
    }
}

/// Runs every configured run, then the oracle or ideal baseline, and writes
/// the result files when `opts.out_dir` is set.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<ResultBundle> {
    let mut cfg = config.clone();
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(w) = opts.workers {
        cfg.workers = w;
    }
    if let Some(it) = opts.iterations {
        cfg.sampler.iterations = it;
    }
    if let Some(d) = opts.ideal_draws {
        cfg.prediction.ideal_draws = Some(d);
    }
    cfg.validate()?;
    let model = BuiltModel::from_config(&cfg.model)?;
    let fixture = load_fixture(&cfg, &model)?;
    let theta = theta_true(&cfg, &model)?;
    let sim = model.shared();
    let prior = build_prior(&cfg, sim.param_names())?;
    let future_times = sim.future_times();
    let indices = report_indices(&future_times, cfg.prediction.report_times.as_deref());
    let labels = sim.future_labels();

    let mut runs: Vec<RunResult> = Vec::new();
    let mut wall = Vec::new();
    for (i, run) in cfg.runs.iter().enumerate() {
        let started = Instant::now();
        let seed = run_seed(cfg.seed, i);
        let (report, problem, tuning, step_scales, calibration) = if run.scheme == Scheme::F {
            let src_label = run.source.as_deref().unwrap_or_default();
            let src = runs
                .iter()
                .find(|r| r.label == src_label)
                .ok_or_else(|| AbcError::Config(vec![format!("unknown source '{src_label}'")]))?;
            let report = abc_f_predict(&src.report, &src.problem, seed)?;
            (report, src.problem.clone(), Vec::new(), None, Vec::new())
        } else {
            let summary = run.summary.as_deref().unwrap_or_default();
            let spec = SummarySpec::from_id(summary, &model.summary_context(&fixture.observed))?;
            let ctx = NormContext {
                run,
                model: &model,
                spec: &spec,
                theta: &theta,
            };
            let built = build_region(&ctx, seed)?;
            let problem = AbcProblem::new(
                sim.clone(),
                prior.clone(),
                spec,
                built.region,
                fixture.observed.clone(),
            )?;
            let Sampled {
                mut report,
                problem,
                tuning,
                step_scales,
            } = sample(&cfg, run, problem, seed, cfg.workers)?;
            if run.scheme == Scheme::L {
                report = abc_l_predict(&report, &problem, seed)?;
            }
            (report, problem, tuning, step_scales, built.calibration)
        };
        let preds: Vec<&TimeSeriesData> = report
            .draws
            .iter()
            .filter_map(|d| d.prediction.as_ref())
            .collect();
        let masses: Vec<f64> = report
            .draws
            .iter()
            .filter(|d| d.prediction.is_some())
            .map(WeightedDraw::mass)
            .collect();
        let quantiles = if masses.iter().any(|&m| m > 0.0) {
            quantile_table(&preds, &masses, &labels)
        } else {
            Vec::new()
        };
        let target = cfg.sampler.target_acceptance.filter(|_| run.h.is_none());
        let metadata = RunMetadata {
            experiment: cfg.id.clone(),
            label: run.label.clone(),
            scheme: run.scheme,
            summary: run.summary.clone(),
            source: run.source.clone(),
            sampler: cfg.sampler.kind,
            seed: cfg.seed,
            run_seed: seed,
            workers: cfg.workers,
            iterations: report.iterations,
            burn_in: cfg.sampler.burn_in,
            acceptance_rate: report.acceptance_rate,
            target_acceptance: target,
            within_target_band: target
                .filter(|_| run.scheme != Scheme::F)
                .map(|t| report.acceptance_rate >= 0.5 * t && report.acceptance_rate <= 2.0 * t),
            ess: report.ess,
            n_simulations: report.n_simulations,
            n_conditional_simulations: report.n_conditional_simulations,
            thresholds: report.threshold_used.clone(),
            tuning,
            step_scales,
            calibration,
            unique_draws: report.draws.len(),
            total_mass: report.total_mass(),
            min_discrepancy: report.min_discrepancy,
            warnings: report.warnings.clone(),
        };
        runs.push(RunResult {
            label: run.label.clone(),
            scheme: run.scheme,
            report,
            problem,
            quantiles,
            metadata,
        });
        wall.push((run.label.clone(), started.elapsed().as_secs_f64()));
    }

    let started = Instant::now();
    let oracle = closed_form_oracle(&model, &fixture, &future_times, &indices)?;
    // An unattainable ideal baseline is reported, not fatal to the runs.
    let (ideal, ideal_error) = match ideal_bundle(&cfg, &model, &fixture, &theta, &labels) {
        Ok(b) => (b, None),
        Err(e @ AbcError::DegenerateSample { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    wall.push(("oracle".into(), started.elapsed().as_secs_f64()));

    let bundle = ResultBundle {
        config: cfg,
        model,
        fixture,
        runs,
        ideal,
        ideal_error,
        oracle,
        report_indices: indices,
        wall_seconds: wall,
    };
    if let Some(dir) = &opts.out_dir {
        write_bundle(&bundle, dir)?;
    }
    Ok(bundle)
}

fn closed_form_oracle(
    model: &BuiltModel,
    fixture: &Fixture,
    future_times: &[f64],
    indices: &[usize],
) -> Result<Option<serde_json::Value>> {
    let y = fixture.observed.values();
    match model {
        BuiltModel::Markov(m) => {
            let ybar = markov_ybar(y, m.phi);
            let yn = y[y.len() - 1];
            let c = markov_c_posterior(m, ybar, 0.0)?;
            let mut preds = Vec::new();
            for &i in indices {
                let g =
                    markov_predictive(m, ybar, yn, MarkovVariant::Multistep { p: i + 1, h: 0.0 })?;
                preds.push(json!({
                    "column": prediction_column("y", future_times[i]),
                    "mean": g.mean,
                    "variance": g.variance,
                }));
            }
            Ok(Some(json!({
                "kind": "markov",
                "parameters": [{"column": "c", "mean": c.mean, "variance": c.variance}],
                "predictive": preds,
            })))
        }
        BuiltModel::Ssm(m) => {
            let post = ssm_posteriors(m, y)?;
            let col = prediction_column("y", future_times[0]);
            Ok(Some(json!({
                "kind": "ssm",
                "parameters": [{"column": "c", "mean": post.c.mean, "variance": post.c.variance}],
                "predictive": [{"column": col, "mean": post.predictive.mean, "variance": post.predictive.variance}],
            })))
        }
        _ => Ok(None),
    }
}

fn ideal_bundle(
    cfg: &ExperimentConfig,
    model: &BuiltModel,
    fixture: &Fixture,
    theta: &crate::types::ParamVector,
    labels: &[String],
) -> Result<Option<IdealBundle>> {
    let n = cfg.prediction.ideal_draws.unwrap_or(10_000);
    let mut rng = stream(cfg.seed, streams::ORACLE);
    let (draws, attempts, radius) = match model {
        BuiltModel::Lv(m) if m.task == LvTask::Missing => {
            let radius = cfg.prediction.gap_radius.unwrap_or(10.0);
            let g = lv_gap_ideal(m, theta.values(), &fixture.observed, radius, n, &mut rng)?;
            (g.accepted, g.attempts, Some(radius))
        }
        BuiltModel::Mg1(_) | BuiltModel::Lv(_) => {
            let latent = model
                .latent_state(&fixture.observed, fixture.latent.as_ref())
                .ok_or_else(|| {
                    AbcError::NotComparable(
                        "ideal predictive needs the fixture's latent file".into(),
                    )
                })?;
            let sim = model.simulator();
            let latent_arg = (!latent.is_empty()).then_some(latent.as_slice());
            let carry = sim.carry_state(&fixture.observed, latent_arg)?;
            (
                ideal_predictive(sim, theta.values(), &carry, n, &mut rng)?,
                n,
                None,
            )
        }
        _ => return Ok(None),
    };
    let refs: Vec<&TimeSeriesData> = draws.iter().collect();
    let quantiles = quantile_table(&refs, &vec![1.0; refs.len()], labels);
    Ok(Some(IdealBundle {
        draws,
        quantiles,
        attempts,
        radius,
    }))
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn prediction_header(labels: &[String], times: &[f64], indices: &[usize]) -> Vec<String> {
    indices
        .iter()
        .flat_map(|&i| labels.iter().map(move |l| prediction_column(l, times[i])))
        .collect()
}

fn write_bundle(b: &ResultBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| AbcError::io(dir, e))?;
    let sim = b.model.simulator();
    let times = sim.future_times();
    let labels = sim.future_labels();
    let bins = b.config.prediction.histogram_bins;
    std::fs::write(dir.join("config.toml"), b.config.to_toml()?)
        .map_err(|e| AbcError::io(dir, e))?;

    for r in &b.runs {
        let rd = dir.join(&r.label);
        std::fs::create_dir_all(&rd).map_err(|e| AbcError::io(&rd, e))?;
        let names = sim.param_names();
        let mut header: Vec<String> = names.iter().cloned().collect();
        header.extend(prediction_header(&labels, &times, &b.report_indices));
        header.push("weight".into());
        header.push("multiplicity".into());
        let rows: Vec<Vec<String>> = r
            .report
            .draws
            .iter()
            .map(|d| {
                let mut row: Vec<String> = d.theta.values().iter().map(|&v| fmt_f64(v)).collect();
                for &i in &b.report_indices {
                    for c in 0..labels.len() {
                        row.push(match &d.prediction {
                            Some(p) => fmt_f64(p.record(i)[c]),
                            None => String::new(),
                        });
                    }
                }
                row.push(fmt_f64(d.weight));
                row.push(d.multiplicity.to_string());
                row
            })
            .collect();
        write_csv(&rd.join("draws.csv"), &header, &rows)?;
        if !r.quantiles.is_empty() {
            write_quantiles(&rd.join("quantiles.csv"), &r.quantiles)?;
        }
        for (j, name) in names.iter().enumerate() {
            let (x, w) = r.report.theta_column(j);
            write_histogram(
                &rd.join(format!("hist_{}.csv", file_safe(name))),
                &histogram(&x, &w, bins),
            )?;
        }
        for &i in &b.report_indices {
            for (c, l) in labels.iter().enumerate() {
                let (x, w) = r.prediction(i, c);
                if x.is_empty() {
                    continue;
                }
                let col = prediction_column(l, times[i]);
                write_histogram(
                    &rd.join(format!("hist_{}.csv", file_safe(&col))),
                    &histogram(&x, &w, bins),
                )?;
            }
        }
        write_json(&rd.join("metadata.json"), &r.metadata)?;
    }

    if let Some(o) = &b.oracle {
        write_json(&dir.join("oracle.json"), o)?;
    }
    if let Some(ideal) = &b.ideal {
        let idir = dir.join("ideal");
        std::fs::create_dir_all(&idir).map_err(|e| AbcError::io(&idir, e))?;
        write_quantiles(&idir.join("quantiles.csv"), &ideal.quantiles)?;
        let header = prediction_header(&labels, &times, &b.report_indices);
        let rows: Vec<Vec<String>> = ideal
            .draws
            .iter()
            .map(|p| {
                b.report_indices
                    .iter()
                    .flat_map(|&i| p.record(i).iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>())
                    .collect()
            })
            .collect();
        write_csv(&idir.join("draws.csv"), &header, &rows)?;
        write_json(
            &idir.join("metadata.json"),
            &json!({
                "draws": ideal.draws.len(),
                "attempts": ideal.attempts,
                "radius": ideal.radius,
                "theta_true": b.config.model.theta_true,
            }),
        )?;
    }
    let runs: Vec<_> = b
        .runs
        .iter()
        .map(|r| json!({"label": r.label, "scheme": r.scheme, "acceptance_rate": r.metadata.acceptance_rate}))
        .collect();
    write_json(
        &dir.join("manifest.json"),
        &json!({
            "experiment": b.config.id,
            "seed": b.config.seed,
            "workers": b.config.workers,
            "runs": runs,
            "oracle": b.oracle.as_ref().map(|_| "oracle.json"),
            "ideal": b.ideal.as_ref().map(|_| "ideal"),
            "ideal_error": b.ideal_error,
        }),
    )?;
    // Wall time is kept apart so the other files are reproducible byte for byte.
    let timing: serde_json::Map<String, serde_json::Value> = b
        .wall_seconds
        .iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    write_json(&dir.join("timing.json"), &timing)
}
