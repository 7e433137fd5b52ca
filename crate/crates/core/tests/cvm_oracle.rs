//! Bootstrap CvM p-values against a separate implementation of the
//! statistic with Stephens' asymptotic p-value for the composite normal
//! null (the formula used by R's `nortest::cvm.test`).

use kreglib_core::seed::rng_from_seed;
use kreglib_core::stats::{cvm_normality, cvm_statistic};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

fn oracle_w2(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    let mut x = values.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = x.iter().sum::<f64>() / m;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let phi = Normal::new(mean, sd).unwrap();
    1.0 / (12.0 * m)
        + x.iter().enumerate().map(|(i, &v)| (phi.cdf(v) - (2.0 * i as f64 + 1.0) / (2.0 * m)).powi(2)).sum::<f64>()
}

fn oracle_p(w2: f64, m: usize) -> f64 {
    let ww = (1.0 + 0.5 / m as f64) * w2;
    if ww < 0.0275 {
        1.0 - (-13.953 + 775.5 * ww - 12542.61 * ww * ww).exp()
    } else if ww < 0.051 {
        1.0 - (-5.903 + 179.546 * ww - 1515.29 * ww * ww).exp()
    } else if ww < 0.092 {
        (0.886 - 31.62 * ww + 10.897 * ww * ww).exp()
    } else if ww < 1.1 {
        (1.111 - 34.242 * ww + 12.832 * ww * ww).exp()
    } else {
        7.37e-10
    }
}

fn normal_sample(seed: u64, m: usize) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

#[test]
fn statistic_matches_oracle() {
    for seed in 0..5 {
        let x = normal_sample(seed, 100);
        let (a, b) = (cvm_statistic(&x), oracle_w2(&x));
        // statrs and libm erfc agree to about 1e-10 relative
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn bootstrap_p_matches_asymptotic_formula() {
    for seed in [11, 12, 13] {
        let x = normal_sample(seed, 100);
        let ours = cvm_normality(&x, 10_000, 99).unwrap();
        let theirs = oracle_p(oracle_w2(&x), 100);
        assert!((ours - theirs).abs() <= 0.03, "seed {seed}: bootstrap {ours}, asymptotic {theirs}");
    }
}

#[test]
fn skewed_sample_agrees_in_the_tail() {
    let x: Vec<f64> = normal_sample(5, 100).into_iter().map(|v| v.exp()).collect();
    let ours = cvm_normality(&x, 10_000, 99).unwrap();
    let theirs = oracle_p(oracle_w2(&x), 100);
    assert!(ours < 0.01 && theirs < 0.01, "bootstrap {ours}, asymptotic {theirs}");
}
