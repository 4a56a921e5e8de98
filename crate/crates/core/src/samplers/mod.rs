//! Perturb-and-MAP samplers.
//!
//! * [`gumbel_max_sample`]: one Gumbel draw per full configuration; the
//!   argmax is exactly Gibbs distributed. Desk-scale only.
//! * [`approx_map_sample`]: low-dimensional (unary or pairwise) noise and a
//!   single MAP solve; an approximation with no exactness contract.
//! * [`expand_tree`] / [`approx_pair_marginal`]: replicated-subtree expansion
//!   of a forest, whose perturbed MAP labels on an anchor edge approach the
//!   Gibbs pair marginal as the replication count grows.
//! * [`make_bound_family`] / [`unbiased_sample`]: sequential rejection
//!   sampling driven by self-reducible upper bounds; accepted outputs are
//!   Gibbs distributed.

mod expand;
mod unbiased;

use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{mean_std_error, BoundEstimate, BoundKind};
use crate::error::{Error, Result};
use crate::exact::{ExactOracle, Indexer};
use crate::map::{solve_map, Strategy};
use crate::model::{Assignment, PairwiseModel};
use crate::perturbation::{
    argmax_first, perturb_low_dim, sample_gumbel, PerturbScheme, GUMBEL_VARIANCE,
};
use crate::seed::{replicate, SeedPath};

pub use expand::{
    approx_pair_marginal, expand_tree, expanded_map_batch, ExpandedModel, PairMarginalEstimate,
    EXPANSION_CAP,
};
pub use unbiased::{
    acceptance_rate, make_bound_family, unbiased_attempt, unbiased_batch, unbiased_sample,
    AcceptanceEstimate, Attempt, FamilyKind, LevelValue, UnbiasedDraw, UpperBoundFamily,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Exact,
    GumbelFull,
    ApproxUnary,
    ApproxPairwise,
    ApproxExpanded,
    Unbiased,
    Gibbs,
    Metropolis,
}

/// Draws plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub samples: Vec<Assignment>,
    pub sampler: SamplerKind,
    pub seed: Option<SeedPath>,
    /// Total rejections (unbiased sampler only).
    pub restarts: u64,
    /// True when the sampler ran outside its guarantee (cyclic graph without
    /// expansion).
    pub heuristic: bool,
    #[serde(with = "duration_secs")]
    pub wall_time: Duration,
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

/// Full-perturbation sampler with the energy table computed once.
#[derive(Debug, Clone)]
pub struct GumbelMaxSampler {
    indexer: Indexer,
    energies: Vec<f64>,
}

impl GumbelMaxSampler {
    pub fn new(model: &PairwiseModel, oracle: &ExactOracle) -> Result<Self> {
        let energies = oracle.energies(model)?;
        if energies.iter().all(|e| *e == f64::NEG_INFINITY) {
            return Err(Error::Infeasible);
        }
        Ok(GumbelMaxSampler {
            indexer: Indexer::new(model.domain_sizes()),
            energies,
        })
    }

    fn perturbed<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend(self.energies.iter().map(|e| e + sample_gumbel(rng)));
    }

    /// `argmax_x θ(x) + γ(x)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Assignment {
        let mut buf = Vec::with_capacity(self.energies.len());
        self.perturbed(rng, &mut buf);
        self.indexer.assignment(argmax_first(&buf))
    }

    /// `max_x θ(x) + γ(x)`, a Gumbel variable located at `log Z`.
    pub fn max_value<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for e in &self.energies {
            let v = e + sample_gumbel(rng);
            if v > best {
                best = v;
            }
        }
        best
    }
}

/// One exact Gibbs draw via full perturbation.
pub fn gumbel_max_sample<R: Rng + ?Sized>(
    model: &PairwiseModel,
    rng: &mut R,
) -> Result<Assignment> {
    Ok(GumbelMaxSampler::new(model, &ExactOracle::default())?.sample(rng))
}

/// Sample mean of `m` full-perturbation maxima. The standard error of the
/// mean is `π/√(6m)`, reported as the analytic error next to the empirical one.
pub fn estimate_logz_full(
    model: &PairwiseModel,
    m: usize,
    seed: &SeedPath,
) -> Result<BoundEstimate> {
    if m < 1 {
        return Err(Error::InvalidInput(
            "sample count must be at least 1".into(),
        ));
    }
    let sampler = GumbelMaxSampler::new(model, &ExactOracle::default())?;
    let maxima: Vec<f64> = replicate(seed, m, |_, rng| Ok::<_, Error>(sampler.max_value(rng)))?;
    let (mean, se) = mean_std_error(&maxima);
    Ok(BoundEstimate {
        value: mean,
        kind: BoundKind::Point,
        samples: m,
        std_error: Some(se),
        analytic_std_error: Some((GUMBEL_VARIANCE / m as f64).sqrt()),
        epsilon_slack: None,
        seed: Some(seed.clone()),
    })
}

/// Chebyshev tail for the full-perturbation estimator:
/// `P(|mean - log Z| ≥ ε) ≤ π² / (6 m ε²)`.
pub fn chebyshev_tail(m: usize, epsilon: f64) -> f64 {
    GUMBEL_VARIANCE / (m as f64 * epsilon * epsilon)
}

/// Argmax of one low-dimensionally perturbed MAP problem.
pub fn approx_map_sample<R: Rng + ?Sized>(
    model: &PairwiseModel,
    scheme: PerturbScheme,
    strategy: Strategy,
    rng: &mut R,
) -> Result<Assignment> {
    if scheme == PerturbScheme::Full {
        return gumbel_max_sample(model, rng);
    }
    let perturbed = perturb_low_dim(model, scheme, rng);
    Ok(solve_map(&perturbed, strategy)?.argmax)
}

/// `draws` approximate samples, draw `k` on stream `seed.child(k)`.
pub fn approx_map_batch(
    model: &PairwiseModel,
    scheme: PerturbScheme,
    strategy: Strategy,
    draws: usize,
    seed: &SeedPath,
) -> Result<SampleBatch> {
    let start = std::time::Instant::now();
    let samples = replicate(seed, draws, |_, rng| {
        approx_map_sample(model, scheme, strategy, rng)
    })?;
    let sampler = match scheme {
        PerturbScheme::Full => SamplerKind::GumbelFull,
        PerturbScheme::Unary => SamplerKind::ApproxUnary,
        _ => SamplerKind::ApproxPairwise,
    };
    Ok(SampleBatch {
        samples,
        sampler,
        seed: Some(seed.clone()),
        restarts: 0,
        heuristic: scheme != PerturbScheme::Full,
        wall_time: start.elapsed(),
    })
}

/// `draws` exact samples by full perturbation, draw `k` on stream `seed.child(k)`.
pub fn gumbel_max_batch(
    model: &PairwiseModel,
    draws: usize,
    seed: &SeedPath,
) -> Result<SampleBatch> {
    let start = std::time::Instant::now();
    let sampler = GumbelMaxSampler::new(model, &ExactOracle::default())?;
    let samples = replicate(seed, draws, |_, rng| Ok::<_, Error>(sampler.sample(rng)))?;
    Ok(SampleBatch {
        samples,
        sampler: SamplerKind::GumbelFull,
        seed: Some(seed.clone()),
        restarts: 0,
        heuristic: false,
        wall_time: start.elapsed(),
    })
}
