//! Property tests of the invariants that hold for every input.

use std::sync::Arc;

use abcpred::discrepancy::{AcceptanceRegion, Kernel, Norm};
use abcpred::harness::output::{quantile_table, QUANTILE_LEVELS};
use abcpred::models::{GaussianMarkovModel, Mg1Model};
use abcpred::oracles::{ab_coefficients, markov_predictive, MarkovVariant};
use abcpred::rng::{seeded, stream};
use abcpred::samplers::{abc_rejection, AbcProblem, Mode};
use abcpred::stats::autocorrelation;
use abcpred::summaries::{calibrate_weights, CalibrationMethod, SummaryContext, WeightCalibration};
use abcpred::{
    compute_summary, kernel_weight, tune_threshold, ParamVector, Prior, SimRequest, Simulator,
    SummarySpec, TimeSeriesData, Transform,
};
use nalgebra::{DMatrix, Matrix2, Vector2};
use proptest::prelude::*;
use rand::Rng;

fn names(p: usize) -> Arc<[String]> {
    abcpred::default_names(p)
}

fn series(values: Vec<f64>) -> TimeSeriesData {
    let times = (1..=values.len()).map(|i| i as f64).collect();
    TimeSeriesData::scalar(times, values).unwrap()
}

#[test]
fn mg1_prior_integrates_to_one() {
    let prior = Prior::new(
        vec![0.0, 0.0, 0.0],
        vec![10.0, 10.0, 1.0 / 3.0],
        vec![
            Transform::Identity,
            Transform::ShiftBy { of: 0 },
            Transform::Identity,
        ],
        names(3),
    )
    .unwrap();
    // Bounding box of the support in natural coordinates.
    let upper = [10.0, 20.0, 1.0 / 3.0];
    let volume: f64 = upper.iter().product();
    let mut rng = seeded(11);
    let n = 1_000_000;
    let mut total = 0.0;
    for _ in 0..n {
        let theta: Vec<f64> = upper.iter().map(|u| u * rng.random::<f64>()).collect();
        total += prior
            .density(&ParamVector::new(theta, names(3)).unwrap())
            .unwrap();
    }
    let integral = total / n as f64 * volume;
    assert!((integral - 1.0).abs() < 0.02, "{integral}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prior_draws_are_reproducible(seed in any::<u64>()) {
        let prior = Prior::uniform(vec![-1.0, 0.0], vec![1.0, 5.0], names(2)).unwrap();
        let a: Vec<ParamVector> = (0..5).map({
            let mut r = seeded(seed);
            move |_| prior.sample(&mut r)
        }).collect();
        let prior = Prior::uniform(vec![-1.0, 0.0], vec![1.0, 5.0], names(2)).unwrap();
        let mut r = seeded(seed);
        for x in a {
            prop_assert_eq!(x, prior.sample(&mut r));
        }
    }

    #[test]
    fn summary_parts_concatenate_to_the_whole(seed in any::<u64>(), c in -2.0..2.0f64) {
        let model = GaussianMarkovModel::new(0.5, 1.0, 30, 1).unwrap();
        let z = model.simulate(&[c], SimRequest::Observed, &mut seeded(seed)).unwrap().observed;
        let ctx = SummaryContext { phi: Some(0.5), ..Default::default() };
        for id in ["markov.s1", "markov.s2", "markov.s3"] {
            let spec = SummarySpec::from_id(id, &ctx).unwrap();
            let s = compute_summary(&spec, &z).unwrap();
            let mut joined = s[spec.parametric_range()].to_vec();
            joined.extend_from_slice(&s[spec.predictive_range()]);
            prop_assert_eq!(joined, s);
        }
    }

    #[test]
    fn mg1_s0_ignores_order(values in prop::collection::vec(0.1..20.0f64, 8..40), seed in any::<u64>()) {
        let spec = SummarySpec::from_id("mg1.s0", &SummaryContext::default()).unwrap();
        let a = compute_summary(&spec, &series(values.clone())).unwrap();
        let mut shuffled = values;
        let mut rng = seeded(seed);
        for i in (1..shuffled.len()).rev() {
            let j = rng.random_range(0..=i);
            shuffled.swap(i, j);
        }
        prop_assert_eq!(a, compute_summary(&spec, &series(shuffled)).unwrap());
    }

    #[test]
    fn autocorrelation_is_bounded(x in prop::collection::vec(-100.0..100.0f64, 3..60), k in 1usize..3) {
        let r = autocorrelation(&x, k);
        prop_assert!(r.is_nan() || (-1.0 - 1e-12..=1.0 + 1e-12).contains(&r), "{}", r);
    }

    #[test]
    fn uniform_weight_is_monotone(a in 0.0..10.0f64, b in 0.0..10.0f64, h in 0.0..10.0f64) {
        let region = AcceptanceRegion::single(0..1, Norm::euclidean(), Kernel::uniform(h));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (w_lo, _) = kernel_weight(&region, &[0.0], &[lo]);
        let (w_hi, _) = kernel_weight(&region, &[0.0], &[hi]);
        prop_assert!(w_lo >= w_hi);
    }

    #[test]
    fn infinite_threshold_accepts_every_pair(
        s in prop::collection::vec(-1e6..1e6f64, 2),
        z in prop::collection::vec(-1e6..1e6f64, 2),
    ) {
        let region = AcceptanceRegion::single(0..2, Norm::l_infinity(), Kernel::uniform(f64::INFINITY));
        prop_assert_eq!(kernel_weight(&region, &s, &z).0, 1.0);
    }

    #[test]
    fn quadratic_norm_survives_rotation(
        angle in 0.0..std::f64::consts::TAU,
        d1 in 0.1..5.0f64,
        d2 in 0.1..5.0f64,
        off in -0.9..0.9f64,
        r in prop::collection::vec(-3.0..3.0f64, 2),
    ) {
        let off = off * (d1 * d2).sqrt();
        let c = Matrix2::new(d1, off, off, d2);
        let (sn, cs) = angle.sin_cos();
        let rot = Matrix2::new(cs, -sn, sn, cs);
        let c_rot = rot * c * rot.transpose();
        let cal = |m: Matrix2<f64>| WeightCalibration {
            method: CalibrationMethod::Covariance,
            matrix: Some(DMatrix::from_iterator(2, 2, m.iter().copied())),
            mad2: None,
            n_pilot: 0,
            theta_ref: None,
            jittered: false,
        };
        let plain = Norm::weighted_quadratic(&cal(c)).unwrap().eval(&r);
        let v = rot * Vector2::new(r[0], r[1]);
        let rotated = Norm::weighted_quadratic(&cal(c_rot)).unwrap().eval(&[v[0], v[1]]);
        prop_assert!((plain - rotated).abs() <= 1e-9 * (1.0 + plain.abs()), "{} vs {}", plain, rotated);
    }

    #[test]
    fn tuned_threshold_scales_with_discrepancies(
        d in prop::collection::vec(0.0..100.0f64, 1..200),
        scale in 0.01..100.0f64,
        target in 0.01..0.99f64,
    ) {
        let h = tune_threshold(&d, target).unwrap();
        let scaled: Vec<f64> = d.iter().map(|x| x * scale).collect();
        let hs = tune_threshold(&scaled, target).unwrap();
        prop_assert!((hs - scale * h).abs() <= 1e-9 * (1.0 + hs.abs()));
    }

    #[test]
    fn a_coefficient_at_least_one(phi in -3.0..3.0f64, n in 1usize..=50) {
        prop_assume!((phi.abs() - 1.0).abs() > 1e-6);
        let a = ab_coefficients(phi, n).unwrap().a;
        prop_assert!(a >= 1.0 - 1e-9, "a = {}", a);
    }

    #[test]
    fn exact_predictive_is_least_variable(phi in -0.99..0.99f64, n in 2usize..200) {
        prop_assume!(phi.abs() > 1e-3);
        let m = GaussianMarkovModel::new(phi, 1.0, n, 1).unwrap();
        let exact = markov_predictive(&m, 0.3, 1.2, MarkovVariant::Exact).unwrap();
        let psbar = markov_predictive(&m, 0.3, 1.2, MarkovVariant::PSbar { h: 0.0 }).unwrap();
        prop_assert!(exact.variance <= psbar.variance + 1e-12);
    }

    #[test]
    fn f_and_p_ring_targets_coincide(phi in -0.99..0.99f64, n in 1usize..200, h in 0.0..2.0f64, ybar in -5.0..5.0f64, yn in -5.0..5.0f64) {
        let m = GaussianMarkovModel::new(phi, 1.3, n, 1).unwrap();
        let f = markov_predictive(&m, ybar, yn, MarkovVariant::FSbar { h }).unwrap();
        let p = markov_predictive(&m, ybar, yn, MarkovVariant::PRing { h }).unwrap();
        prop_assert_eq!(f, p);
    }

    #[test]
    fn quantile_bands_are_monotone(rows in prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 4), 1..60), w in prop::collection::vec(0.0..3.0f64, 60)) {
        let preds: Vec<TimeSeriesData> = rows.iter().map(|r| series(r.clone())).collect();
        let refs: Vec<&TimeSeriesData> = preds.iter().collect();
        let mut masses = w[..preds.len()].to_vec();
        masses[0] += 1.0;
        for row in quantile_table(&refs, &masses, &["y".to_string()]) {
            prop_assert_eq!(row.quantiles.len(), QUANTILE_LEVELS.len());
            prop_assert!(row.quantiles.windows(2).all(|q| q[0] <= q[1]), "{:?}", row.quantiles);
        }
    }

    #[test]
    fn queue_recursion_identities(t1 in 0.0..5.0f64, width in 0.0..5.0f64, rate in 0.05..2.0f64, seed in any::<u64>()) {
        let model = Mg1Model::new(30, 5).unwrap();
        let theta = [t1, t1 + width, rate];
        let out = model.simulate(&theta, SimRequest::LatentJoint, &mut seeded(seed)).unwrap();
        let y = out.observed.values();
        let lat = out.observed.latents().unwrap();
        let mut x = 0.0;
        let mut prev_v = f64::NEG_INFINITY;
        for (i, yi) in y.iter().enumerate() {
            prop_assert!(*yi >= 0.0);
            x += yi;
            let (v, w) = (lat[2 * i], lat[2 * i + 1]);
            prop_assert!(v > prev_v, "arrivals increase");
            prop_assert!(x >= v - 1e-9, "departure after arrival");
            prop_assert!((x - v - w).abs() <= 1e-9 * (1.0 + x.abs()));
            prop_assert!(w >= t1 - 1e-12, "wait at least the minimum service");
            prev_v = v;
        }
    }
}

#[test]
fn mg1_s1_sees_order() {
    let y: Vec<f64> = (0..40)
        .map(|i| 1.0 + (i as f64 * 0.37).sin().abs() * 5.0)
        .collect();
    let data = series(y.clone());
    let ctx = SummaryContext {
        reference: Some(data.clone()),
        ..Default::default()
    };
    let spec = SummarySpec::from_id("mg1.s1", &ctx).unwrap();
    let a = compute_summary(&spec, &data).unwrap();
    // Move the largest value to the end.
    let imax = (0..y.len()).max_by(|&i, &j| y[i].total_cmp(&y[j])).unwrap();
    let mut swapped = y;
    let last = swapped.len() - 1;
    swapped.swap(imax, last);
    let b = compute_summary(&spec, &series(swapped)).unwrap();
    assert_eq!(a[spec.parametric_range()], b[spec.parametric_range()]);
    assert_ne!(a[spec.predictive_range()], b[spec.predictive_range()]);
}

#[test]
fn calibration_is_deterministic() {
    let model = Mg1Model::new(50, 1).unwrap();
    let theta = ParamVector::new(vec![4.0, 7.0, 0.15], model.param_names()).unwrap();
    let observed = model
        .simulate(theta.values(), SimRequest::Observed, &mut seeded(1))
        .unwrap()
        .observed;
    let ctx = SummaryContext {
        reference: Some(observed),
        ..Default::default()
    };
    let spec = SummarySpec::from_id("mg1.s1", &ctx).unwrap();
    for method in [CalibrationMethod::Covariance, CalibrationMethod::Mad] {
        let run = || {
            calibrate_weights(&model, &theta, &spec, 0..8, method, 200, &mut stream(9, 3)).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.mad2, b.mad2);
    }
}

#[test]
fn reported_discrepancies_reproduce_weights() {
    let model = GaussianMarkovModel::new(0.5, 1.0, 50, 1).unwrap();
    let observed = model
        .simulate(&[1.0], SimRequest::Observed, &mut seeded(4))
        .unwrap()
        .observed;
    let ctx = SummaryContext {
        phi: Some(0.5),
        ..Default::default()
    };
    let spec = SummarySpec::from_id("markov.s2", &ctx).unwrap();
    let region = AcceptanceRegion::dual(
        abcpred::discrepancy::RegionComponent {
            slice: 0..1,
            norm: Norm::euclidean(),
            kernel: Kernel::gaussian(0.3),
        },
        abcpred::discrepancy::RegionComponent {
            slice: 1..2,
            norm: Norm::euclidean(),
            kernel: Kernel::uniform(1.5),
        },
    );
    let prior = Prior::uniform(vec![-3.0], vec![5.0], model.param_names()).unwrap();
    let problem = AbcProblem::new(Arc::new(model), prior, spec, region.clone(), observed).unwrap();
    let report = abc_rejection(&problem, 3000, Mode::Standard, 8, 1).unwrap();
    assert!(!report.draws.is_empty());
    for d in &report.draws {
        let (w, raw) = kernel_weight(&region, &problem.s_obs, &d.summary);
        assert_eq!(raw, d.raw_discrepancy);
        assert!(w > 0.0);
        assert!(region.weight_of(&d.raw_discrepancy) > 0.0);
    }
}
