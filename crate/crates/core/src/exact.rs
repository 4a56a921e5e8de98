//! Brute-force ground truth for models with small state spaces.
//!
//! Configurations are enumerated in lexicographic order with vertex 0 as the
//! most significant digit. Energies are accumulated vertex by vertex
//! (`partial[i] = partial[i-1] + θ_i(x_i) + Σ_{j<i} θ_ij(x_i, x_j)`) so that an
//! odometer step at position `i` only recomputes the suffix `i..n`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, Incidence, PairwiseModel};

pub const DEFAULT_STATE_CAP: u64 = 1 << 24;

const CHUNK: usize = 1 << 14;

/// Brute-force oracle with a configurable state-space cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactOracle {
    pub state_cap: u64,
}

impl Default for ExactOracle {
    fn default() -> Self {
        ExactOracle {
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

impl ExactOracle {
    pub fn with_cap(state_cap: u64) -> Self {
        ExactOracle { state_cap }
    }

    /// Number of configurations, or an error above the cap.
    pub fn states(&self, model: &PairwiseModel) -> Result<usize> {
        let states = model.state_space_size().unwrap_or(u128::MAX);
        if states > self.state_cap as u128 {
            return Err(Error::StateSpaceTooLarge {
                states,
                cap: self.state_cap,
            });
        }
        Ok(states as usize)
    }

    /// `log Z` by streaming log-sum-exp. Chunks are reduced in index order,
    /// so the result does not depend on the number of worker threads.
    pub fn log_partition(&self, model: &PairwiseModel) -> Result<f64> {
        let states = self.states(model)?;
        let chunks: Vec<(f64, f64)> = (0..states.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = LogSumExp::default();
                for_each_in_range(model, c * CHUNK, ((c + 1) * CHUNK).min(states), |_, e| {
                    acc.push(e)
                });
                (acc.max, acc.sum)
            })
            .collect();
        let mut total = LogSumExp::default();
        for (max, sum) in chunks {
            total.merge(max, sum);
        }
        Ok(total.value())
    }

    /// `θ(x)` for every configuration in lexicographic order.
    pub fn energies(&self, model: &PairwiseModel) -> Result<Vec<f64>> {
        let states = self.states(model)?;
        let mut out = Vec::with_capacity(states);
        for_each_in_range(model, 0, states, |_, e| out.push(e));
        Ok(out)
    }

    /// The Gibbs distribution as a table in lexicographic order.
    pub fn distribution(&self, model: &PairwiseModel) -> Result<Vec<f64>> {
        let energies = self.energies(model)?;
        let log_z = log_sum_exp(&energies);
        if log_z == f64::NEG_INFINITY {
            return Err(Error::Infeasible);
        }
        Ok(energies.iter().map(|e| (e - log_z).exp()).collect())
    }

    pub fn marginal(&self, model: &PairwiseModel, subset: &[usize]) -> Result<MarginalTable> {
        let shape = subset_shape(model, subset)?;
        let probs = self.distribution(model)?;
        let indexer = Indexer::new(model.domain_sizes());
        let table_strides = strides(&shape);
        let mut table = vec![0.0; shape.iter().product()];
        for (idx, p) in probs.iter().enumerate() {
            let mut k = 0;
            for (s, &v) in subset.iter().enumerate() {
                k += indexer.label(idx, v) * table_strides[s];
            }
            table[k] += p;
        }
        Ok(MarginalTable {
            subset: subset.to_vec(),
            shape,
            probs: table,
        })
    }

    /// Single-vertex marginals of every vertex.
    pub fn vertex_marginals(&self, model: &PairwiseModel) -> Result<Vec<Vec<f64>>> {
        let probs = self.distribution(model)?;
        let indexer = Indexer::new(model.domain_sizes());
        let mut out: Vec<Vec<f64>> = model.domain_sizes().iter().map(|&d| vec![0.0; d]).collect();
        for (idx, p) in probs.iter().enumerate() {
            for (v, m) in out.iter_mut().enumerate() {
                m[indexer.label(idx, v)] += p;
            }
        }
        Ok(out)
    }

    pub fn sampler(&self, model: &PairwiseModel) -> Result<ExactSampler> {
        ExactSampler::new(model, self)
    }
}

/// `log Z` with the default cap.
pub fn log_partition(model: &PairwiseModel) -> Result<f64> {
    ExactOracle::default().log_partition(model)
}

/// Exact joint marginal of `subset` with the default cap.
pub fn marginal(model: &PairwiseModel, subset: &[usize]) -> Result<MarginalTable> {
    ExactOracle::default().marginal(model, subset)
}

/// One exact draw with the default cap. Builds the sampler on every call;
/// use [`ExactSampler`] directly for repeated draws.
pub fn exact_sample<R: Rng + ?Sized>(model: &PairwiseModel, rng: &mut R) -> Result<Assignment> {
    Ok(ExactSampler::new(model, &ExactOracle::default())?.sample(rng))
}

/// Exact sequential sampler: draws `x_1` from its marginal, then each `x_i`
/// from its conditional given `x_1..x_{i-1}`. The conditionals are block sums
/// of the enumerated, cumulated Gibbs weights.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    domain_sizes: Vec<usize>,
    strides: Vec<usize>,
    /// `cumulative[k]` = total weight of configurations with index `< k`.
    cumulative: Vec<f64>,
}

impl ExactSampler {
    pub fn new(model: &PairwiseModel, oracle: &ExactOracle) -> Result<Self> {
        let energies = oracle.energies(model)?;
        let log_z = log_sum_exp(&energies);
        if log_z == f64::NEG_INFINITY {
            return Err(Error::Infeasible);
        }
        let mut cumulative = Vec::with_capacity(energies.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for e in energies {
            acc += (e - log_z).exp();
            cumulative.push(acc);
        }
        Ok(ExactSampler {
            domain_sizes: model.domain_sizes().to_vec(),
            strides: strides(model.domain_sizes()),
            cumulative,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Assignment {
        let mut labels = Vec::with_capacity(self.domain_sizes.len());
        let mut lo = 0usize;
        for (i, &d) in self.domain_sizes.iter().enumerate() {
            let stride = self.strides[i];
            let block = |l: usize| {
                self.cumulative[lo + (l + 1) * stride] - self.cumulative[lo + l * stride]
            };
            let total = self.cumulative[lo + d * stride] - self.cumulative[lo];
            let u = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for l in 0..d {
                let w = block(l);
                acc += w;
                if w > 0.0 && u < acc {
                    chosen = Some(l);
                    break;
                }
            }
            // Rounding can leave u just above the running sum; fall back to the
            // last label with positive weight.
            let l = chosen.unwrap_or_else(|| {
                (0..d)
                    .rev()
                    .find(|&l| block(l) > 0.0)
                    .expect("block has mass")
            });
            labels.push(l);
            lo += l * stride;
        }
        Assignment(labels)
    }
}

/// Joint probabilities of a vertex subset, row-major over the subset's labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalTable {
    pub subset: Vec<usize>,
    pub shape: Vec<usize>,
    pub probs: Vec<f64>,
}

impl MarginalTable {
    /// Normalized frequency table of `subset` labels over `samples`.
    pub fn from_samples<'a>(
        model: &PairwiseModel,
        subset: &[usize],
        samples: impl IntoIterator<Item = &'a Assignment>,
    ) -> Result<Self> {
        let shape = subset_shape(model, subset)?;
        let table_strides = strides(&shape);
        let mut counts = vec![0.0; shape.iter().product()];
        let mut total = 0.0;
        for x in samples {
            let k: usize = subset
                .iter()
                .zip(&table_strides)
                .map(|(&v, s)| x[v] * s)
                .sum();
            counts[k] += 1.0;
            total += 1.0;
        }
        if total == 0.0 {
            return Err(Error::InvalidInput("no samples".into()));
        }
        counts.iter_mut().for_each(|c| *c /= total);
        Ok(MarginalTable {
            subset: subset.to_vec(),
            shape,
            probs: counts,
        })
    }

    pub fn get(&self, labels: &[usize]) -> f64 {
        let k: usize = labels
            .iter()
            .zip(strides(&self.shape))
            .map(|(l, s)| l * s)
            .sum();
        self.probs[k]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// `½ Σ |p - q|` between tables over the same subset and shape.
pub fn total_variation(p: &MarginalTable, q: &MarginalTable) -> Result<f64> {
    if p.subset != q.subset || p.shape != q.shape {
        return Err(Error::InvalidInput(
            "marginal tables differ in subset or shape".into(),
        ));
    }
    Ok(tv_distance(&p.probs, &q.probs))
}

/// `½ Σ |p - q|` over plain probability vectors of equal length.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Mean over vertices of the single-vertex TV distance.
pub fn mean_vertex_tv(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(p, q)| tv_distance(p, q)).sum::<f64>() / a.len() as f64
}

/// Empirical single-vertex marginals of a sample set.
pub fn empirical_vertex_marginals<'a>(
    domain_sizes: &[usize],
    samples: impl IntoIterator<Item = &'a Assignment>,
) -> Vec<Vec<f64>> {
    let mut counts: Vec<Vec<f64>> = domain_sizes.iter().map(|&d| vec![0.0; d]).collect();
    let mut total = 0.0;
    for x in samples {
        for (v, c) in counts.iter_mut().enumerate() {
            c[x[v]] += 1.0;
        }
        total += 1.0;
    }
    if total > 0.0 {
        counts.iter_mut().flatten().for_each(|c| *c /= total);
    }
    counts
}

fn subset_shape(model: &PairwiseModel, subset: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; model.num_vertices()];
    for &v in subset {
        if v >= model.num_vertices() {
            return Err(Error::InvalidInput(format!("vertex {v} out of range")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidInput(format!(
                "vertex {v} repeated in subset"
            )));
        }
    }
    Ok(subset.iter().map(|&v| model.domain_size(v)).collect())
}

/// Row-major strides, last dimension fastest.
pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Maps between configuration indices and labels.
#[derive(Debug, Clone)]
pub struct Indexer {
    domain_sizes: Vec<usize>,
    strides: Vec<usize>,
}

impl Indexer {
    pub fn new(domain_sizes: &[usize]) -> Self {
        Indexer {
            domain_sizes: domain_sizes.to_vec(),
            strides: strides(domain_sizes),
        }
    }

    #[inline]
    pub fn label(&self, index: usize, vertex: usize) -> usize {
        (index / self.strides[vertex]) % self.domain_sizes[vertex]
    }

    pub fn assignment(&self, index: usize) -> Assignment {
        Assignment(
            (0..self.domain_sizes.len())
                .map(|v| self.label(index, v))
                .collect(),
        )
    }

    pub fn index(&self, x: &Assignment) -> usize {
        x.0.iter().zip(&self.strides).map(|(l, s)| l * s).sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl LogSumExp {
    #[inline]
    fn push(&mut self, e: f64) {
        if e == f64::NEG_INFINITY {
            return;
        }
        if e > self.max {
            self.sum = self.sum * (self.max - e).exp() + 1.0;
            self.max = e;
        } else {
            self.sum += (e - self.max).exp();
        }
    }

    fn merge(&mut self, max: f64, sum: f64) {
        if max == f64::NEG_INFINITY {
            return;
        }
        if max > self.max {
            self.sum = self.sum * (self.max - max).exp() + sum;
            self.max = max;
        } else {
            self.sum += sum * (max - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Numerically stable `log Σ exp(v)`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let mut acc = LogSumExp::default();
    values.iter().for_each(|&v| acc.push(v));
    acc.value()
}

/// Calls `f(labels, θ(labels))` for configuration indices `start..end` in
/// lexicographic order.
pub(crate) fn for_each_in_range(
    model: &PairwiseModel,
    start: usize,
    end: usize,
    mut f: impl FnMut(&[usize], f64),
) {
    if start >= end {
        return;
    }
    let n = model.num_vertices();
    if n == 0 {
        f(&[], 0.0);
        return;
    }
    let back: Vec<Vec<Incidence>> = model
        .incidences()
        .into_iter()
        .enumerate()
        .map(|(i, inc)| inc.into_iter().filter(|x| x.other < i).collect())
        .collect();
    let indexer = Indexer::new(model.domain_sizes());
    let mut labels: Vec<usize> = (0..n).map(|v| indexer.label(start, v)).collect();
    let mut partial = vec![0.0; n];
    let recompute = |from: usize, labels: &[usize], partial: &mut [f64]| {
        for i in from..n {
            let mut acc = if i == 0 { 0.0 } else { partial[i - 1] };
            acc += model.unary(i)[labels[i]];
            for inc in &back[i] {
                acc += model.incident_value(inc, labels[i], labels[inc.other]);
            }
            partial[i] = acc;
        }
    };
    recompute(0, &labels, &mut partial);
    let domains = model.domain_sizes();
    for _ in start..end {
        f(&labels, partial[n - 1]);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if labels[i] + 1 < domains[i] {
                labels[i] += 1;
                labels[i + 1..].iter_mut().for_each(|l| *l = 0);
                recompute(i, &labels, &mut partial);
                break;
            }
        }
    }
}
