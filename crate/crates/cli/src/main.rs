use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abcpred::harness::{
    canonical_config, compare_results, generate_fixture, list_experiments, run_experiment,
    ExperimentConfig, OracleSpec, RunOptions,
};
use clap::{Parser, Subcommand};
use serde_json::json;

/// Likelihood-free predictive inference experiments.
#[derive(Debug, Parser)]
#[command(name = "abcpred", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the observed-data fixture of a registered experiment.
    Fixtures {
        id: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
    /// Run an experiment from a config file or a registered id.
    Run {
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the sampler's iteration count.
        #[arg(long)]
        iterations: Option<usize>,
        /// Override the number of ideal-predictive draws.
        #[arg(long)]
        ideal_draws: Option<usize>,
    },
    /// Compare a result directory against an oracle.
    Compare {
        result_dir: PathBuf,
        /// `auto`, `gaussian:MEAN,VAR@COLUMN` or `draws:PATH@COLUMN`.
        #[arg(long, default_value = "auto")]
        oracle: String,
    },
    /// List the registered experiments.
    ListExperiments,
}

fn load_config(arg: &str) -> abcpred::Result<ExperimentConfig> {
    let path = Path::new(arg);
    if path.exists() {
        ExperimentConfig::load(path)
    } else {
        canonical_config(arg)
    }
}

fn print(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("JSON values serialize")
    );
}

fn execute(cmd: Command) -> abcpred::Result<()> {
    match cmd {
        Command::Fixtures { id, seed, out } => {
            let p = generate_fixture(&id, seed, &out)?;
            print(&json!({
                "observed": p.observed,
                "latent": p.latent,
                "future": p.truth,
            }));
        }
        Command::Run {
            config,
            seed,
            workers,
            out,
            iterations,
            ideal_draws,
        } => {
            let cfg = load_config(&config)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from("results").join(&cfg.id));
            let opts = RunOptions {
                out_dir: Some(out_dir.clone()),
                seed,
                workers,
                iterations,
                ideal_draws,
            };
            let bundle = run_experiment(&cfg, &opts)?;
            let runs: Vec<_> = bundle
                .runs
                .iter()
                .map(|r| {
                    json!({
                        "label": r.label,
                        "acceptance_rate": r.metadata.acceptance_rate,
                        "thresholds": r.metadata.thresholds,
                        "warnings": r.metadata.warnings,
                    })
                })
                .collect();
            print(&json!({"experiment": bundle.config.id, "out": out_dir, "runs": runs}));
        }
        Command::Compare { result_dir, oracle } => {
            let spec = OracleSpec::parse(&oracle)?;
            let report = compare_results(&result_dir, &spec)?;
            print(&serde_json::to_value(report).expect("report serializes"));
        }
        Command::ListExperiments => {
            for (id, description) in list_experiments() {
                println!("{id}\t{description}");
            }
        }
    }
    Ok(())
}

fn fail(kind: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({"error": {"kind": kind, "message": message}}));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim_end().to_string()),
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.to_string()),
    }
}
