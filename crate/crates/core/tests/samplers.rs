//! Statistical checks of the samplers on models with known answers.

use std::sync::Arc;

use abcpred::discrepancy::{AcceptanceRegion, Kernel, Norm};
use abcpred::models::{GaussianMarkovModel, LinearGaussianSsm};
use abcpred::rng::{seeded, SimRng};
use abcpred::samplers::{
    abc_f_predict, abc_mcmc, abc_rejection, tune_rejection_threshold, AbcProblem, McmcSettings,
    Mode,
};
use abcpred::stats::{ks_one_sample_weighted, ks_pvalue, ks_two_sample, ks_two_sample_weighted};
use abcpred::summaries::SummaryContext;
use abcpred::{
    Prior, Result, SimOutput, SimRequest, Simulator, SimulatorCapabilities, SummarySpec,
    TimeSeriesData,
};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{Beta, ContinuousCDF};

fn times(from: usize, to: usize) -> Vec<f64> {
    (from..=to).map(|i| i as f64).collect()
}

/// `y_i ~ N(mu, 1)` i.i.d.; predicts one more observation.
#[derive(Debug)]
struct IidNormal {
    n: usize,
}

impl Simulator for IidNormal {
    fn name(&self) -> &str {
        "iid-normal"
    }

    fn param_names(&self) -> Arc<[String]> {
        Arc::from(vec!["mu".to_string()])
    }

    fn capabilities(&self) -> SimulatorCapabilities {
        SimulatorCapabilities {
            joint: true,
            conditional: true,
            latent_joint: true,
            latent_conditional: true,
        }
    }

    fn simulate(&self, theta: &[f64], request: SimRequest, rng: &mut SimRng) -> Result<SimOutput> {
        let z: Vec<f64> = (0..self.n)
            .map(|_| theta[0] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let future = match request {
            SimRequest::Joint => Some(self.simulate_future(theta, &[], rng)?),
            _ => None,
        };
        Ok(SimOutput {
            observed: TimeSeriesData::scalar(times(1, self.n), z)?,
            future,
            latent_state: Some(Vec::new()),
            truncated: false,
        })
    }

    fn carry_state(&self, _data: &TimeSeriesData, _latent: Option<&[f64]>) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }

    fn simulate_future(
        &self,
        theta: &[f64],
        _carry: &[f64],
        rng: &mut SimRng,
    ) -> Result<TimeSeriesData> {
        let y = theta[0] + rng.sample::<f64, _>(StandardNormal);
        TimeSeriesData::scalar(times(self.n + 1, self.n + 1), vec![y])
    }

    fn future_times(&self) -> Vec<f64> {
        times(self.n + 1, self.n + 1)
    }
}

/// `n` Bernoulli(p) trials.
#[derive(Debug)]
struct Bernoulli {
    n: usize,
}

impl Simulator for Bernoulli {
    fn name(&self) -> &str {
        "bernoulli"
    }

    fn param_names(&self) -> Arc<[String]> {
        Arc::from(vec!["p".to_string()])
    }

    fn capabilities(&self) -> SimulatorCapabilities {
        SimulatorCapabilities {
            joint: false,
            conditional: false,
            latent_joint: false,
            latent_conditional: false,
        }
    }

    fn simulate(&self, theta: &[f64], _request: SimRequest, rng: &mut SimRng) -> Result<SimOutput> {
        let z: Vec<f64> = (0..self.n)
            .map(|_| f64::from(u8::from(rng.random::<f64>() < theta[0])))
            .collect();
        Ok(SimOutput {
            observed: TimeSeriesData::scalar(times(1, self.n), z)?,
            future: None,
            latent_state: None,
            truncated: false,
        })
    }

    fn carry_state(&self, _data: &TimeSeriesData, _latent: Option<&[f64]>) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }

    fn simulate_future(
        &self,
        _theta: &[f64],
        _carry: &[f64],
        _rng: &mut SimRng,
    ) -> Result<TimeSeriesData> {
        unreachable!("no predictive capability")
    }

    fn future_times(&self) -> Vec<f64> {
        Vec::new()
    }
}

fn sample_mean(d: &TimeSeriesData) -> Vec<f64> {
    vec![d.values().iter().sum::<f64>() / d.len() as f64]
}

/// With exact matching on the sufficient count, ABC-MCMC targets the exact
/// Beta posterior; a chain that breaks detailed balance drifts away from it.
#[test]
fn mcmc_on_exact_match_recovers_beta_posterior() {
    let n = 20;
    let k = 6.0;
    let observed = TimeSeriesData::scalar(
        times(1, n),
        (0..n)
            .map(|i| f64::from(u8::from((i as f64) < k)))
            .collect(),
    )
    .unwrap();
    let spec = SummarySpec::custom("count", 1, 0, |d| vec![d.values().iter().sum()]);
    let region = AcceptanceRegion::single(0..1, Norm::euclidean(), Kernel::uniform(0.0));
    let prior = Prior::uniform(vec![0.0], vec![1.0], Arc::from(vec!["p".to_string()])).unwrap();
    let problem =
        AbcProblem::new(Arc::new(Bernoulli { n }), prior, spec, region, observed).unwrap();
    let mut settings = McmcSettings::new(200_000, 2_000);
    settings.step_scales = Some(vec![0.15]);
    let report = abc_mcmc(&problem, &settings, Mode::Standard, 17).unwrap();
    let (x, w) = report.theta_column(0);
    let beta = Beta::new(k + 1.0, n as f64 - k + 1.0).unwrap();
    let ks = ks_one_sample_weighted(&x, &w, |t| beta.cdf(t));
    assert!(ks < 0.02, "KS {ks}");
}

/// For i.i.d. data the future is independent of the past given theta, so
/// ABC-P and ABC-F predictives share one target.
#[test]
fn iid_abc_p_and_abc_f_agree() {
    let model = Arc::new(IidNormal { n: 20 });
    let observed = model
        .simulate(&[0.7], SimRequest::Observed, &mut seeded(3))
        .unwrap()
        .observed;
    let spec = SummarySpec::custom("mean", 1, 0, sample_mean);
    let region = AcceptanceRegion::single(0..1, Norm::euclidean(), Kernel::uniform(0.05));
    let prior = Prior::uniform(vec![-3.0], vec![3.0], model.param_names()).unwrap();
    let problem = AbcProblem::new(model, prior, spec, region, observed).unwrap();
    let p = abc_rejection(&problem, 300_000, Mode::Predictive, 5, 4).unwrap();
    let std = abc_rejection(&problem, 300_000, Mode::Standard, 6, 4).unwrap();
    let f = abc_f_predict(&std, &problem, 7).unwrap();
    let (xp, wp) = p.prediction_column(0, 0);
    let (xf, wf) = f.prediction_column(0, 0);
    assert!(
        xp.len() > 5_000 && xf.len() > 5_000,
        "{} {}",
        xp.len(),
        xf.len()
    );
    let d = ks_two_sample_weighted(&xp, &wp, &xf, &wf);
    let ne = (xp.len() * xf.len()) as f64 / (xp.len() + xf.len()) as f64;
    assert!(ks_pvalue(d, ne) > 0.01, "KS {d}");
}

/// ABC-P and ABC-L weight the same simulated pseudo-data, so their
/// parameter marginals coincide.
#[test]
fn abc_p_and_abc_l_share_the_parameter_marginal() {
    let model = Arc::new(LinearGaussianSsm::new(0.5, 1.0, 0.5, 30, 1).unwrap());
    let observed = model
        .simulate(&[1.0], SimRequest::Observed, &mut seeded(2))
        .unwrap()
        .observed;
    let ctx = SummaryContext {
        ssm: Some((0.5, 1.0, 0.5, 30)),
        ..Default::default()
    };
    let spec = SummarySpec::from_id("ssm.s1", &ctx).unwrap();
    let region = AcceptanceRegion::single(0..spec.dim(), Norm::euclidean(), Kernel::uniform(1.0));
    let prior = Prior::uniform(vec![-4.0], vec![6.0], model.param_names()).unwrap();
    let problem = AbcProblem::new(model, prior, spec, region, observed).unwrap();
    let h = tune_rejection_threshold(&problem, 0.05, 20_000, 20, 4).unwrap();
    let problem = problem
        .with_region(problem.region.with_primary_threshold(h))
        .unwrap();
    let p = abc_rejection(&problem, 400_000, Mode::Predictive, 21, 4).unwrap();
    let l = abc_rejection(&problem, 400_000, Mode::Latent, 22, 4).unwrap();
    let xp = p.theta_column(0).0;
    let xl = l.theta_column(0).0;
    assert!(
        xp.len() > 10_000 && xl.len() > 10_000,
        "{} {}",
        xp.len(),
        xl.len()
    );
    let d = ks_two_sample(&xp, &xl);
    let ne = (xp.len() * xl.len()) as f64 / (xp.len() + xl.len()) as f64;
    assert!(ks_pvalue(d, ne) > 0.01, "KS {d}");
    assert!(l.draws.iter().all(|d| d.latent.is_some()));
}

/// With `h = inf` every pair is accepted, so ABC-P predictions are draws of
/// the prior predictive.
#[test]
fn infinite_threshold_gives_prior_predictive() {
    let model = Arc::new(GaussianMarkovModel::new(0.5, 1.0, 20, 1).unwrap());
    let observed = model
        .simulate(&[1.0], SimRequest::Observed, &mut seeded(1))
        .unwrap()
        .observed;
    let ctx = SummaryContext {
        phi: Some(0.5),
        ..Default::default()
    };
    let spec = SummarySpec::from_id("markov.s1", &ctx).unwrap();
    let region = AcceptanceRegion::single(0..1, Norm::euclidean(), Kernel::uniform(f64::INFINITY));
    let prior = Prior::uniform(vec![-2.0], vec![2.0], model.param_names()).unwrap();
    let problem = AbcProblem::new(model.clone(), prior.clone(), spec, region, observed).unwrap();
    let report = abc_rejection(&problem, 10_000, Mode::Predictive, 9, 2).unwrap();
    assert_eq!(report.draws.len(), 10_000);
    let abc = report.prediction_column(0, 0).0;
    let mut rng = seeded(10);
    let direct: Vec<f64> = (0..10_000)
        .map(|_| {
            let theta = prior.sample(&mut rng);
            let out = model
                .simulate(theta.values(), SimRequest::Joint, &mut rng)
                .unwrap();
            out.future.unwrap().values()[0]
        })
        .collect();
    let d = ks_two_sample(&abc, &direct);
    assert!(ks_pvalue(d, 5_000.0) > 0.01, "KS {d}");
}

/// A rejected proposal repeats the whole augmented state, prediction
/// included.
#[test]
fn mcmc_repeats_whole_state() {
    let model = Arc::new(GaussianMarkovModel::new(0.5, 1.0, 20, 1).unwrap());
    let observed = model
        .simulate(&[1.0], SimRequest::Observed, &mut seeded(1))
        .unwrap()
        .observed;
    let ctx = SummaryContext {
        phi: Some(0.5),
        ..Default::default()
    };
    let spec = SummarySpec::from_id("markov.s1", &ctx).unwrap();
    let region = AcceptanceRegion::single(0..1, Norm::euclidean(), Kernel::uniform(0.1));
    let prior = Prior::uniform(vec![-3.0], vec![5.0], model.param_names()).unwrap();
    let problem = AbcProblem::new(model, prior, spec, region, observed).unwrap();
    let mut s = McmcSettings::new(20_000, 0);
    s.step_scales = Some(vec![0.3]);
    let r = abc_mcmc(&problem, &s, Mode::Predictive, 4).unwrap();
    let total: u64 = r.draws.iter().map(|d| d.multiplicity).sum();
    assert_eq!(total, 20_000);
    let repeats = total - r.draws.len() as u64;
    let accepted = (r.acceptance_rate * 20_000.0).round() as u64;
    // The first recorded state is the initial one, not an acceptance.
    assert!(repeats == 20_000 - accepted || repeats + 1 == 20_000 - accepted);
    assert!(r.draws.iter().all(|d| d.prediction.is_some()));
    for pair in r.draws.windows(2) {
        assert_ne!(pair[0].theta, pair[1].theta);
    }
}
