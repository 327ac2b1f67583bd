//! Likelihood-free predictive inference.
//!
//! Approximate Bayesian computation (ABC) samplers for posterior predictive
//! distributions of future or missing data. Three schemes are provided:
//!
//! * **ABC-F**: draw `theta` by standard ABC, then forward-simulate
//!   `y~ | y, theta`.
//! * **ABC-P**: simulate `(z, z~)` jointly and weight by the discrepancy of
//!   the summarised pseudo-data `z`.
//! * **ABC-L**: simulate `(z, v)` with latent variables `v`, weight by the
//!   discrepancy, then simulate `y~ | y, v, theta`.
//!
//! Each runs on rejection, importance-sampling or ABC-MCMC samplers.

pub mod discrepancy;
pub mod error;
pub mod harness;
pub mod models;
pub mod oracles;
pub mod prior;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod summaries;
pub mod types;

pub use discrepancy::{kernel_weight, tune_threshold, AcceptanceRegion, Kernel, Norm};
pub use error::{AbcError, Result};
pub use models::{SimRequest, Simulator};
pub use prior::{prior_density, prior_sample, Prior, Transform};
pub use rng::SimRng;
pub use samplers::{
    abc_f_predict, abc_importance, abc_l_predict, abc_mcmc, abc_rejection, defer_predictions,
    AbcProblem, McmcSettings, Mode, SamplerReport,
};
pub use stats::ess;
pub use summaries::{compute_summary, SummarySpec};
pub use types::{
    default_names, ParamVector, SimOutput, SimulatorCapabilities, TimeSeriesData, WeightedDraw,
};
