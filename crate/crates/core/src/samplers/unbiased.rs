//! Sequential rejection sampling with self-reducible upper bounds.
//!
//! Fix a vertex order `v_1..v_n`. A family `U_0 ≥ … ≥ U_n = θ` with
//! `Σ_{x_j} exp U_j(x_1..x_j) ≤ exp U_{j-1}(x_1..x_{j-1})` lets us draw `x_j`
//! with probability `exp(U_j - U_{j-1})` and reject with the leftover mass.
//! The step probabilities of an accepted run telescope to
//! `exp(θ(x) - U_0)`, so accepted outputs are Gibbs distributed and the
//! acceptance probability is `Z / exp U_0`.
//!
//! Two families are provided:
//!
//! * `ExactLse`: `U_j = log Σ_{x_{j+1..n}} exp θ`, the tight family. No
//!   rejections; a brute-force sequential sampler.
//! * `GumbelMc(M)`: `U_j` is the mean over `M` draws of
//!   `max_{x_{j+1..n}} θ(x) + Σ_{i>j} γ_i(x_i)` with the prefix clamped, solved
//!   by a MAP solver on the conditioned model.
//!
//! Each prefix is evaluated once on its own noise stream
//! (`seed / j / x_1 / … / x_j / k`) and cached, so the family is a fixed
//! function of the prefix and later levels reuse earlier evaluations.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{SampleBatch, SamplerKind};
use crate::bounds::mean_std_error;
use crate::error::{Error, Result};
use crate::exact::ExactOracle;
use crate::map::{solve_map, Strategy};
use crate::model::{Assignment, PairwiseModel};
use crate::perturbation::perturb_unary;
use crate::seed::{replicate, SeedPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    ExactLse,
    GumbelMc { samples: usize },
}

/// A family member `U_j(prefix)` with its Monte Carlo standard error (zero
/// for exact evaluations).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelValue {
    pub value: f64,
    pub std_error: f64,
}

impl LevelValue {
    fn exact(value: f64) -> Self {
        LevelValue {
            value,
            std_error: 0.0,
        }
    }
}

pub struct UpperBoundFamily<'m> {
    model: &'m PairwiseModel,
    order: Vec<usize>,
    kind: FamilyKind,
    strategy: Strategy,
    seed: SeedPath,
    oracle: ExactOracle,
    cache: Mutex<HashMap<Vec<usize>, LevelValue>>,
}

/// Builds a family over `order` (row-major vertex order when `None`).
pub fn make_bound_family<'m>(
    model: &'m PairwiseModel,
    order: Option<Vec<usize>>,
    kind: FamilyKind,
    strategy: Strategy,
    seed: &SeedPath,
) -> Result<UpperBoundFamily<'m>> {
    let n = model.num_vertices();
    let order = order.unwrap_or_else(|| (0..n).collect());
    let mut seen = vec![false; n];
    if order.len() != n
        || order
            .iter()
            .any(|&v| v >= n || std::mem::replace(&mut seen[v], true))
    {
        return Err(Error::InvalidInput(
            "vertex order must be a permutation of all vertices".into(),
        ));
    }
    let oracle = ExactOracle::default();
    match kind {
        FamilyKind::ExactLse => {
            oracle.states(model)?;
        }
        FamilyKind::GumbelMc { samples } if samples == 0 => {
            return Err(Error::InvalidInput(
                "Monte Carlo sample count must be at least 1".into(),
            ));
        }
        FamilyKind::GumbelMc { .. } => {}
    }
    Ok(UpperBoundFamily {
        model,
        order,
        kind,
        strategy,
        seed: seed.clone(),
        oracle,
        cache: Mutex::new(HashMap::new()),
    })
}

impl<'m> UpperBoundFamily<'m> {
    pub fn model(&self) -> &'m PairwiseModel {
        self.model
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn num_levels(&self) -> usize {
        self.order.len()
    }

    /// Number of distinct prefixes evaluated so far.
    pub fn cached_evaluations(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    /// `U_j(prefix)` with `j = prefix.len()`; `prefix[k]` is the label of
    /// `order[k]`.
    pub fn evaluate(&self, prefix: &[usize]) -> Result<LevelValue> {
        if prefix.len() > self.order.len() {
            return Err(Error::InvalidInput(
                "prefix longer than the vertex order".into(),
            ));
        }
        for (k, &l) in prefix.iter().enumerate() {
            if l >= self.model.domain_size(self.order[k]) {
                return Err(Error::InvalidInput(format!(
                    "label {l} out of range at level {k}"
                )));
            }
        }
        if let Some(v) = self.cache.lock().expect("cache lock").get(prefix) {
            return Ok(*v);
        }
        let value = self.compute(prefix)?;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(prefix.to_vec(), value);
        Ok(value)
    }

    /// `U_0`, the log upper bound on `Z`.
    pub fn log_upper_bound(&self) -> Result<LevelValue> {
        self.evaluate(&[])
    }

    fn compute(&self, prefix: &[usize]) -> Result<LevelValue> {
        let clamps: Vec<(usize, usize)> = prefix
            .iter()
            .enumerate()
            .map(|(k, &l)| (self.order[k], l))
            .collect();
        let (reduced, constant, _) = self.model.condition(&clamps);
        if constant == f64::NEG_INFINITY {
            return Ok(LevelValue::exact(f64::NEG_INFINITY));
        }
        if reduced.num_vertices() == 0 {
            return Ok(LevelValue::exact(constant));
        }
        match self.kind {
            FamilyKind::ExactLse => Ok(LevelValue::exact(
                constant + self.oracle.log_partition(&reduced)?,
            )),
            FamilyKind::GumbelMc { samples } => {
                let mut path = Vec::with_capacity(prefix.len() + 1);
                path.push(prefix.len() as u64);
                path.extend(prefix.iter().map(|&l| l as u64));
                let stream = self.seed.descend(&path);
                let maxima = replicate(&stream, samples, |_, rng| {
                    match solve_map(&perturb_unary(&reduced, rng), self.strategy) {
                        Ok(r) => Ok(r.value),
                        Err(Error::Infeasible) => Ok(f64::NEG_INFINITY),
                        Err(e) => Err(e),
                    }
                })?;
                if maxima.iter().any(|v| *v == f64::NEG_INFINITY) {
                    return Ok(LevelValue::exact(f64::NEG_INFINITY));
                }
                let (mean, se) = mean_std_error(&maxima);
                Ok(LevelValue {
                    value: constant + mean,
                    std_error: se,
                })
            }
        }
    }

    /// Largest accepted excess of `Σ_{x_j} p_j(x_j)` over one. Beyond it the
    /// family is reported as violating self-reducibility.
    fn tolerance(&self, parent: &LevelValue, children: &[LevelValue]) -> f64 {
        match self.kind {
            FamilyKind::ExactLse => 1e-9,
            FamilyKind::GumbelMc { .. } => {
                let child_se = children.iter().map(|c| c.std_error).fold(0.0, f64::max);
                (6.0 * (parent.std_error.powi(2) + child_se.powi(2)).sqrt())
                    .exp_m1()
                    .max(1e-9)
            }
        }
    }
}

/// Outcome of one pass of the sequential sampler.
#[derive(Debug, Clone, PartialEq)]
pub enum Attempt {
    Accepted {
        assignment: Assignment,
        /// `log p_j(x_j)` of the chosen label at every level.
        log_step_probs: Vec<f64>,
        /// Levels at which `Σ p_j` exceeded one within tolerance and was
        /// renormalized.
        clipped: usize,
    },
    Rejected {
        level: usize,
    },
}

/// One pass over the levels without restarting.
pub fn unbiased_attempt<R: Rng + ?Sized>(
    family: &UpperBoundFamily<'_>,
    rng: &mut R,
) -> Result<Attempt> {
    let n = family.num_levels();
    let mut prefix = Vec::with_capacity(n);
    let mut parent = family.evaluate(&prefix)?;
    if parent.value == f64::NEG_INFINITY {
        return Err(Error::Infeasible);
    }
    let mut log_step_probs = Vec::with_capacity(n);
    let mut clipped = 0;
    for level in 0..n {
        let d = family.model.domain_size(family.order[level]);
        let mut children = Vec::with_capacity(d);
        for l in 0..d {
            prefix.push(l);
            children.push(family.evaluate(&prefix)?);
            prefix.pop();
        }
        let mut probs: Vec<f64> = children
            .iter()
            .map(|c| (c.value - parent.value).exp())
            .collect();
        let total: f64 = probs.iter().sum();
        let tolerance = family.tolerance(&parent, &children);
        if total > 1.0 + tolerance || total.is_nan() {
            return Err(Error::SelfReducibility {
                level,
                total,
                tolerance,
            });
        }
        if total > 1.0 {
            probs.iter_mut().for_each(|p| *p /= total);
            // excess at rounding level is not reported
            if total > 1.0 + 1e-12 {
                clipped += 1;
            }
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = None;
        for (l, &p) in probs.iter().enumerate() {
            acc += p;
            if p > 0.0 && u < acc {
                chosen = Some(l);
                break;
            }
        }
        let Some(l) = chosen else {
            return Ok(Attempt::Rejected { level });
        };
        log_step_probs.push(probs[l].ln());
        prefix.push(l);
        parent = children[l];
    }
    let mut labels = vec![0; n];
    for (k, &v) in family.order.iter().enumerate() {
        labels[v] = prefix[k];
    }
    Ok(Attempt::Accepted {
        assignment: Assignment(labels),
        log_step_probs,
        clipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnbiasedDraw {
    pub assignment: Assignment,
    pub restarts: usize,
    pub clipped: usize,
}

/// Restarts until an attempt is accepted; fails after `max_restarts`
/// rejections.
pub fn unbiased_sample<R: Rng + ?Sized>(
    family: &UpperBoundFamily<'_>,
    rng: &mut R,
    max_restarts: usize,
) -> Result<UnbiasedDraw> {
    if max_restarts < 1 {
        return Err(Error::InvalidInput(
            "max_restarts must be at least 1".into(),
        ));
    }
    let mut restarts = 0;
    loop {
        match unbiased_attempt(family, rng)? {
            Attempt::Accepted {
                assignment,
                clipped,
                ..
            } => {
                return Ok(UnbiasedDraw {
                    assignment,
                    restarts,
                    clipped,
                });
            }
            Attempt::Rejected { .. } => {
                restarts += 1;
                if restarts >= max_restarts {
                    return Err(Error::ExhaustedRestarts(restarts));
                }
            }
        }
    }
}

/// `draws` accepted samples drawn sequentially from `rng`.
pub fn unbiased_batch<R: Rng + ?Sized>(
    family: &UpperBoundFamily<'_>,
    draws: usize,
    rng: &mut R,
    max_restarts: usize,
) -> Result<SampleBatch> {
    let start = std::time::Instant::now();
    let mut samples = Vec::with_capacity(draws);
    let mut restarts = 0u64;
    for _ in 0..draws {
        let d = unbiased_sample(family, rng, max_restarts)?;
        restarts += d.restarts as u64;
        samples.push(d.assignment);
    }
    Ok(SampleBatch {
        samples,
        sampler: SamplerKind::Unbiased,
        seed: Some(family.seed.clone()),
        restarts,
        heuristic: false,
        wall_time: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceEstimate {
    pub rate: f64,
    pub trials: usize,
    pub accepted: usize,
    /// Binomial standard error `sqrt(rate (1 - rate) / trials)`.
    pub std_error: f64,
}

impl AcceptanceEstimate {
    /// `rate ± 3 σ`, clamped to `[0, 1]`.
    pub fn interval(&self) -> (f64, f64) {
        (
            (self.rate - 3.0 * self.std_error).max(0.0),
            (self.rate + 3.0 * self.std_error).min(1.0),
        )
    }
}

/// Fraction of single attempts that accept before the first restart.
pub fn acceptance_rate<R: Rng + ?Sized>(
    family: &UpperBoundFamily<'_>,
    trials: usize,
    rng: &mut R,
) -> Result<AcceptanceEstimate> {
    if trials == 0 {
        return Err(Error::InvalidInput("trial count must be at least 1".into()));
    }
    let mut accepted = 0;
    for _ in 0..trials {
        if matches!(unbiased_attempt(family, rng)?, Attempt::Accepted { .. }) {
            accepted += 1;
        }
    }
    let rate = accepted as f64 / trials as f64;
    Ok(AcceptanceEstimate {
        rate,
        trials,
        accepted,
        std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
    })
}
