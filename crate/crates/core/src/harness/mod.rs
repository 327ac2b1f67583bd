//! Experiment harness: configs, fixtures, runs and result files.

pub mod compare;
pub mod config;
pub mod fixtures;
pub mod output;
pub mod registry;
pub mod run;
pub mod setup;

pub use compare::{compare_results, ComparisonReport, MarginalComparison, OracleSpec};
pub use config::ExperimentConfig;
pub use fixtures::{generate_fixture, load_fixture, Fixture};
pub use registry::{canonical_config, list_experiments, registered_ids};
pub use run::{run_experiment, ResultBundle, RunOptions, RunResult};
pub use setup::BuiltModel;
