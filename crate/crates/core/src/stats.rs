//! Sample moments and the Cramér–von Mises normality test with estimated
//! parameters.
//!
//! The composite null has no closed-form distribution, so p-values come from
//! a parametric bootstrap: `null_draws` standard-normal samples of the same
//! size are scored the same way, and `p` is the fraction of null statistics
//! at least as large as the observed one.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::seed::{derive_seed, rng_from_seed, stream};

/// Smallest sample the normality test accepts.
pub const CVM_MIN_SAMPLE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    InsufficientSample { needed: usize, got: usize },
}

/// Mean, spread and shape of a list of values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
    /// Moment skewness `m3 / m2^(3/2)`; 0 for constant samples.
    pub skewness: f64,
    /// Set when the sample is constant and the skewness was defined as 0.
    pub degenerate: bool,
    /// Cramér–von Mises p-value, when the sample is large enough.
    pub cvm_p: Option<f64>,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean, sample standard deviation and moment skewness. Needs three values.
pub fn sample_moments(values: &[f64]) -> Result<SampleMoments, StatsError> {
    let m = values.len();
    if m < 3 {
        return Err(StatsError::InsufficientSample { needed: 3, got: m });
    }
    let mu = mean(values);
    let (mut m2, mut m3) = (0.0, 0.0);
    for &x in values {
        let d = x - mu;
        m2 += d * d;
        m3 += d * d * d;
    }
    let std_dev = libm::sqrt(m2 / (m - 1) as f64);
    m2 /= m as f64;
    m3 /= m as f64;
    // relative threshold so round-off around a constant sample counts as constant
    let degenerate = m2 <= f64::EPSILON * f64::EPSILON * mu * mu || m2 == 0.0;
    let skewness = if degenerate { 0.0 } else { m3 / libm::pow(m2, 1.5) };
    Ok(SampleMoments { count: m, mean: mu, std_dev, skewness, degenerate, cvm_p: None })
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// `W^2` against a normal whose mean and standard deviation are estimated
/// from the sample. Constant samples score `+inf`.
pub fn cvm_statistic(values: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    cvm_statistic_sorted(&sorted)
}

fn cvm_statistic_sorted(sorted: &[f64]) -> f64 {
    let m = sorted.len() as f64;
    let mu = mean(sorted);
    let var = sorted.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (m - 1.0);
    let s = libm::sqrt(var);
    if !(s > 0.0) || s <= 1e-12 * mu.abs() {
        return f64::INFINITY;
    }
    let mut w2 = 1.0 / (12.0 * m);
    for (i, &x) in sorted.iter().enumerate() {
        let expected = (2 * i + 1) as f64 / (2.0 * m);
        let d = expected - normal_cdf((x - mu) / s);
        w2 += d * d;
    }
    w2
}

/// Bootstrap null distributions of `W^2`, built lazily per sample size.
///
/// Each size gets its own stream derived from the cache seed, so a p-value
/// does not depend on the order in which sizes were requested.
#[derive(Debug, Clone)]
pub struct CvmNullCache {
    null_draws: usize,
    seed: u64,
    nulls: BTreeMap<usize, Vec<f64>>,
}

impl CvmNullCache {
    pub fn new(null_draws: usize, seed: u64) -> Self {
        Self { null_draws: null_draws.max(1), seed, nulls: BTreeMap::new() }
    }

    pub fn null_draws(&self) -> usize {
        self.null_draws
    }

    /// Builds the null for sample size `m` if it is not cached yet.
    pub fn ensure(&mut self, m: usize) {
        if m < CVM_MIN_SAMPLE || self.nulls.contains_key(&m) {
            return;
        }
        let mut rng = rng_from_seed(derive_seed(self.seed, &[stream::CVM_NULL, m as u64]));
        let mut sample = alloc::vec![0.0f64; m];
        let mut null: Vec<f64> = (0..self.null_draws)
            .map(|_| {
                for x in sample.iter_mut() {
                    *x = StandardNormal.sample(&mut rng);
                }
                sample.sort_unstable_by(f64::total_cmp);
                cvm_statistic_sorted(&sample)
            })
            .collect();
        null.sort_unstable_by(f64::total_cmp);
        self.nulls.insert(m, null);
    }

    /// p-value of statistic `w2` for a sample of size `m`; the null for `m`
    /// must already be cached.
    pub fn p_value(&self, w2: f64, m: usize) -> Option<f64> {
        let null = self.nulls.get(&m)?;
        let below = null.partition_point(|&x| x < w2);
        Some((null.len() - below) as f64 / null.len() as f64)
    }

    /// Normality p-value of `values`, building the null when needed.
    pub fn normality(&mut self, values: &[f64]) -> Result<f64, StatsError> {
        let m = values.len();
        if m < CVM_MIN_SAMPLE {
            return Err(StatsError::InsufficientSample { needed: CVM_MIN_SAMPLE, got: m });
        }
        self.ensure(m);
        Ok(self.p_value(cvm_statistic(values), m).expect("null built above"))
    }
}

/// One-shot normality p-value with a fresh bootstrap of `null_draws` samples.
pub fn cvm_normality(values: &[f64], null_draws: usize, seed: u64) -> Result<f64, StatsError> {
    CvmNullCache::new(null_draws, seed).normality(values)
}

/// Moments plus the CvM p-value when the sample has at least
/// [`CVM_MIN_SAMPLE`] values.
pub fn describe(values: &[f64], cache: &mut CvmNullCache) -> Result<SampleMoments, StatsError> {
    let mut moments = sample_moments(values)?;
    moments.cvm_p = cache.normality(values).ok();
    Ok(moments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn moments_of_small_samples() {
        let m = sample_moments(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((m.mean, m.std_dev, m.skewness, m.degenerate), (1.0, 0.0, 0.0, true));

        let m = sample_moments(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.skewness, 0.0);
        assert!(!m.degenerate);

        // hand oracle for [1,2,2,3,7]: mean 3, deviations -2,-1,-1,0,4
        // m2 = 22/5, m3 = (-8-1-1+64)/5 = 54/5, s = sqrt(22/4)
        let m = sample_moments(&[1.0, 2.0, 2.0, 3.0, 7.0]).unwrap();
        assert_eq!(m.mean, 3.0);
        assert!((m.std_dev - libm::sqrt(5.5)).abs() < 1e-15);
        let g1 = (54.0 / 5.0) / libm::pow(22.0 / 5.0, 1.5);
        assert!((m.skewness - g1).abs() < 1e-12);
        assert!((m.skewness - 1.170_158_632_255_954).abs() < 1e-9);

        assert_eq!(
            sample_moments(&[1.0, 2.0]).unwrap_err(),
            StatsError::InsufficientSample { needed: 3, got: 2 }
        );
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-12);
    }

    /// Inverse normal CDF by bisection on `normal_cdf`.
    fn quantile(p: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quantile_grid_fits_and_bimodal_does_not() {
        let mut cache = CvmNullCache::new(10_000, 3);
        let grid: Vec<f64> = (0..100).map(|i| quantile((i as f64 + 0.5) / 100.0)).collect();
        let p = cache.normality(&grid).unwrap();
        assert!(p > 0.99, "{p}");

        let mut bimodal = vec![0.0; 50];
        bimodal.extend(core::iter::repeat(10.0).take(50));
        let p = cache.normality(&bimodal).unwrap();
        assert!(p < 0.01, "{p}");
    }

    #[test]
    fn small_samples_are_rejected() {
        assert_eq!(
            cvm_normality(&[1.0; 7], 100, 0).unwrap_err(),
            StatsError::InsufficientSample { needed: 8, got: 7 }
        );
    }

    #[test]
    fn constant_sample_scores_zero() {
        let p = cvm_normality(&[2.5; 20], 500, 0).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn null_is_independent_of_request_order() {
        let mut a = CvmNullCache::new(500, 9);
        let mut b = CvmNullCache::new(500, 9);
        a.ensure(20);
        a.ensure(30);
        b.ensure(30);
        b.ensure(20);
        assert_eq!(a.p_value(0.05, 20), b.p_value(0.05, 20));
        assert_eq!(a.p_value(0.05, 30), b.p_value(0.05, 30));
    }
}
