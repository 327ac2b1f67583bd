//! Small descriptive statistics and goodness-of-fit helpers.
//!
//! Weighted variants take one nonnegative mass per value (weight times
//! repeat count for compressed chains).

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{AbcError, Result};

/// Effective sample size `(sum w)^2 / sum w^2`.
pub fn ess(weights: &[f64]) -> Result<f64> {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(AbcError::usage("weights must be finite and nonnegative"));
    }
    if s <= 0.0 {
        return Err(AbcError::DegenerateSample {
            reason: "all weights are zero".into(),
            min_discrepancy: f64::NAN,
        });
    }
    Ok(s * s / s2)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with the `n - 1` divisor.
pub fn variance(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

pub fn sd(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

pub fn weighted_mean(x: &[f64], w: &[f64]) -> f64 {
    let s: f64 = w.iter().sum();
    x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / s
}

/// Weighted variance normalised by total mass (no bias correction).
pub fn weighted_variance(x: &[f64], w: &[f64]) -> f64 {
    let m = weighted_mean(x, w);
    let s: f64 = w.iter().sum();
    x.iter()
        .zip(w)
        .map(|(a, b)| b * (a - m) * (a - m))
        .sum::<f64>()
        / s
}

/// Type-7 (linear interpolation) quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty data");
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    // Checked separately so that infinite entries never produce `0 * inf`.
    if frac == 0.0 || sorted[lo] == sorted[hi] {
        return sorted[lo];
    }
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Type-7 quantile; sorts a copy.
pub fn quantile(x: &[f64], p: f64) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn median(x: &[f64]) -> f64 {
    quantile(x, 0.5)
}

/// Unscaled median absolute deviation.
pub fn mad(x: &[f64]) -> f64 {
    let m = median(x);
    let dev: Vec<f64> = x.iter().map(|v| (v - m).abs()).collect();
    median(&dev)
}

/// Smallest value whose cumulative mass fraction reaches `p`.
pub fn weighted_quantile(x: &[f64], w: &[f64], p: f64) -> f64 {
    let mut idx: Vec<usize> = (0..x.len()).filter(|&i| w[i] > 0.0).collect();
    assert!(!idx.is_empty(), "weighted quantile needs positive mass");
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let total: f64 = idx.iter().map(|&i| w[i]).sum();
    let target = p * total;
    let mut acc = 0.0;
    for &i in &idx {
        acc += w[i];
        if acc >= target {
            return x[i];
        }
    }
    x[*idx.last().unwrap()]
}

/// [`weighted_quantile`] at several levels with one sort. `levels` must be
/// nondecreasing.
pub fn weighted_quantiles(x: &[f64], w: &[f64], levels: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).filter(|&i| w[i] > 0.0).collect();
    assert!(!idx.is_empty(), "weighted quantile needs positive mass");
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let total: f64 = idx.iter().map(|&i| w[i]).sum();
    let mut out = Vec::with_capacity(levels.len());
    let mut acc = 0.0;
    let mut k = 0;
    for &p in levels {
        let target = p * total;
        while k < idx.len() - 1 && acc + w[idx[k]] < target {
            acc += w[idx[k]];
            k += 1;
        }
        out.push(x[idx[k]]);
    }
    out
}

/// Lag-`k` autocorrelation, biased estimator. A constant series gives 0.
pub fn autocorrelation(x: &[f64], k: usize) -> f64 {
    let n = x.len();
    if k >= n {
        return 0.0;
    }
    let m = mean(x);
    let den: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if den <= 0.0 {
        return 0.0;
    }
    let num: f64 = (0..n - k).map(|t| (x[t] - m) * (x[t + k] - m)).sum();
    num / den
}

/// Lag-0 cross-correlation, each series centred by its own mean. Zero if
/// either series is constant.
pub fn cross_correlation(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn normal_cdf(x: f64, mean: f64, variance: f64) -> f64 {
    Normal::new(mean, variance.sqrt())
        .expect("positive variance")
        .cdf(x)
}

fn sorted_support(x: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..x.len()).filter(|&i| w[i] > 0.0).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let total: f64 = idx.iter().map(|&i| w[i]).sum();
    let xs = idx.iter().map(|&i| x[i]).collect();
    let ws = idx.iter().map(|&i| w[i] / total).collect();
    (xs, ws)
}

/// One-sample KS statistic of a weighted sample against a continuous CDF.
pub fn ks_one_sample_weighted(x: &[f64], w: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = sorted_support(x, w);
    let mut d: f64 = 0.0;
    let mut acc = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let before = acc;
        let v = xs[i];
        while i < xs.len() && xs[i] == v {
            acc += ws[i];
            i += 1;
        }
        let f = cdf(v);
        d = d.max((f - before).abs()).max((acc - f).abs());
    }
    d
}

pub fn ks_one_sample(x: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    ks_one_sample_weighted(x, &vec![1.0; x.len()], cdf)
}

/// Two-sample KS statistic between weighted samples.
pub fn ks_two_sample_weighted(x: &[f64], wx: &[f64], y: &[f64], wy: &[f64]) -> f64 {
    let (xs, pw) = sorted_support(x, wx);
    let (ys, qw) = sorted_support(y, wy);
    let (mut i, mut j) = (0, 0);
    let (mut fx, mut fy) = (0.0, 0.0);
    let mut d: f64 = 0.0;
    while i < xs.len() || j < ys.len() {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < xs.len() && xs[i] == v {
            fx += pw[i];
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            fy += qw[j];
            j += 1;
        }
        d = d.max((fx - fy).abs());
    }
    d
}

pub fn ks_two_sample(x: &[f64], y: &[f64]) -> f64 {
    ks_two_sample_weighted(x, &vec![1.0; x.len()], y, &vec![1.0; y.len()])
}

/// Asymptotic Kolmogorov tail probability `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Approximate p-value of a KS statistic with effective sample size `n`
/// (for two samples use `n1 n2 / (n1 + n2)`).
pub fn ks_pvalue(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// Integrated-autocorrelation effective sample size of a chain, using
/// Geyer's initial positive sequence truncation.
pub fn chain_ess(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(x);
    let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return n as f64;
    }
    let acf = |k: usize| -> f64 {
        (0..n - k).map(|t| (x[t] - m) * (x[t + k] - m)).sum::<f64>() / (n as f64 * c0)
    };
    let mut tau = -1.0;
    let mut k = 0;
    while k + 1 < n {
        let pair = acf(k) + acf(k + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 2;
    }
    n as f64 / tau.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ess_examples() {
        assert_eq!(ess(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 4.0);
        assert_eq!(ess(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((ess(&[2.0, 1.0, 1.0]).unwrap() - 16.0 / 6.0).abs() < 1e-12);
        assert!(matches!(
            ess(&[0.0, 0.0]),
            Err(AbcError::DegenerateSample { .. })
        ));
    }

    #[test]
    fn type7_quantiles() {
        let x: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((quantile(&x, 0.10) - 10.9).abs() < 1e-12);
        assert_eq!(quantile(&[5.0, 5.0, 5.0], 0.3), 5.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
    }

    #[test]
    fn quantile_with_infinities() {
        let x = [1.0, 2.0, f64::INFINITY, f64::INFINITY];
        assert_eq!(quantile(&x, 0.0), 1.0);
        assert_eq!(quantile(&x, 1.0), f64::INFINITY);
        assert!((quantile(&x, 1.0 / 3.0) - 2.0).abs() < 1e-12);
        assert_eq!(quantile(&x, 0.5), f64::INFINITY);
    }

    #[test]
    fn mad_example() {
        assert_eq!(mad(&[1.0, 2.0, 3.0, 4.0, 100.0]), 1.0);
    }

    #[test]
    fn autocorrelation_of_alternating_series() {
        let x = [1.0, -1.0, 1.0, -1.0];
        assert!((autocorrelation(&x, 1) + 0.75).abs() < 1e-12);
        assert_eq!(autocorrelation(&[2.0, 2.0, 2.0], 1), 0.0);
    }

    #[test]
    fn weighted_quantile_matches_repeats() {
        let x = [1.0, 2.0, 3.0];
        let w = [1.0, 2.0, 1.0];
        assert_eq!(weighted_quantile(&x, &w, 0.5), 2.0);
        assert_eq!(weighted_quantile(&x, &w, 0.8), 3.0);
        assert_eq!(weighted_quantile(&x, &w, 0.1), 1.0);
    }

    #[test]
    fn ks_identical_samples() {
        let x = [0.1, 0.5, 0.9];
        assert_eq!(ks_two_sample(&x, &x), 0.0);
        let d = ks_one_sample(&[0.5], |v| v);
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_tail_known_value() {
        // P(K > 1.36) is the classical 5% point.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn cross_correlation_of_linear_pair() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        assert!((cross_correlation(&x, &y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_ess_of_iid_is_near_n() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(1);
        let x: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let e = chain_ess(&x);
        assert!(e > 3500.0 && e < 6500.0, "ess {e}");
    }

    #[test]
    fn batched_weighted_quantiles_match_single() {
        let x = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.0];
        let w = [0.5, 1.0, 2.0, 0.0, 1.0, 0.25, 3.0];
        let levels = [0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0];
        let batch = weighted_quantiles(&x, &w, &levels);
        for (p, q) in levels.iter().zip(&batch) {
            assert_eq!(*q, weighted_quantile(&x, &w, *p), "level {p}");
        }
    }
}
