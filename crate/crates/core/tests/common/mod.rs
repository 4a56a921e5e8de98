#![allow(dead_code)]

use perturbmap::exact::Indexer;
use perturbmap::model::{generate_spin_glass, Assignment, PairwiseModel, SpinGlassConfig};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square p-value of observed counts against probabilities.
/// Bins with expected count below 5 are pooled into one bin.
pub fn chi_square_p(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let e = p * n as f64;
        if e < 5.0 {
            pooled_obs += c as f64;
            pooled_exp += e;
            continue;
        }
        stat += (c as f64 - e).powi(2) / e;
        bins += 1;
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    } else if pooled_obs > 0.0 {
        return 0.0;
    }
    if bins < 2 {
        return 1.0;
    }
    1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat)
}

/// Histogram of samples over the lexicographic state index.
pub fn state_counts(domain_sizes: &[usize], samples: &[Assignment]) -> Vec<u64> {
    let idx = Indexer::new(domain_sizes);
    let mut counts = vec![0u64; domain_sizes.iter().product()];
    for x in samples {
        counts[idx.index(x)] += 1;
    }
    counts
}

pub fn frequencies(counts: &[u64]) -> Vec<f64> {
    let n: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n);
    }
    d
}

/// Asymptotic KS critical value at significance 0.001.
pub fn ks_critical_001(n: usize) -> f64 {
    1.9495 / (n as f64).sqrt()
}

pub fn spin_glass(rows: usize, cols: usize, c: f64, seed: u64) -> PairwiseModel {
    generate_spin_glass(&SpinGlassConfig::new(rows, cols, c, seed)).unwrap()
}
