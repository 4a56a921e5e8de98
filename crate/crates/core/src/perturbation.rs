//! Zero-mean Gumbel noise and its attachment to model tables.
//!
//! Every perturbation consumes exactly one draw per table entry, in table
//! order (unary tables vertex by vertex, then pairwise tables edge by edge),
//! whether or not the entry is finite. Excluded (`-inf`) entries stay
//! excluded; finite entries stay finite.

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{ExactOracle, Indexer};
use crate::model::{Assignment, PairwiseModel};

/// Euler–Mascheroni constant; the mean of the standard Gumbel distribution.
pub const EULER_MASCHERONI: f64 = 0.5772156649015329;

/// Variance of any Gumbel distribution with unit scale, `π²/6`.
pub const GUMBEL_VARIANCE: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Which potentials receive noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbScheme {
    /// One draw per full configuration.
    Full,
    /// One draw per unary entry `γ_i(x_i)`.
    Unary,
    /// One draw per unary entry and one per pairwise entry.
    Pairwise,
    /// One draw per pairwise entry `γ_ij(x_i, x_j)`; vertices without
    /// incident edges get unary noise instead.
    Edges,
}

/// Noise family description, recorded in run metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelSpec {
    pub euler_constant: f64,
    pub scheme: PerturbScheme,
}

impl GumbelSpec {
    pub fn new(scheme: PerturbScheme) -> Self {
        GumbelSpec {
            euler_constant: EULER_MASCHERONI,
            scheme,
        }
    }
}

/// Inverse CDF of the zero-mean Gumbel: `-ln(-ln u) - c`.
#[inline]
pub fn gumbel_from_uniform(u: f64) -> f64 {
    -(-u.ln()).ln() - EULER_MASCHERONI
}

/// `F(t) = exp(-exp(-(t + c)))`.
pub fn gumbel_cdf(t: f64) -> f64 {
    (-(-(t + EULER_MASCHERONI)).exp()).exp()
}

/// One zero-mean Gumbel draw from a uniform on the open interval (0, 1).
#[inline]
pub fn sample_gumbel<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    gumbel_from_uniform(rng.sample(Open01))
}

/// Adds `scale[i] * γ` to every unary entry of vertex `i`.
pub(crate) fn add_unary_noise<R: Rng + ?Sized>(
    model: &mut PairwiseModel,
    scale: Option<&[f64]>,
    rng: &mut R,
) {
    for i in 0..model.num_vertices() {
        let s = scale.map_or(1.0, |s| s[i]);
        for v in model.unary_mut(i) {
            *v += s * sample_gumbel(rng);
        }
    }
}

/// Adds `scale[e] * γ` to every pairwise entry of edge `e`.
pub(crate) fn add_pairwise_noise<R: Rng + ?Sized>(
    model: &mut PairwiseModel,
    scale: Option<&[f64]>,
    rng: &mut R,
) {
    for e in 0..model.num_edges() {
        let s = scale.map_or(1.0, |s| s[e]);
        for v in model.pair_table_mut(e) {
            *v += s * sample_gumbel(rng);
        }
    }
}

/// Independent Gumbel noise on every unary entry; pairwise tables unchanged.
/// Supermodularity of the pairwise tables is therefore preserved.
pub fn perturb_unary<R: Rng + ?Sized>(model: &PairwiseModel, rng: &mut R) -> PairwiseModel {
    let mut out = model.clone();
    for v in out.unary_all_mut() {
        *v += sample_gumbel(rng);
    }
    out
}

/// Independent Gumbel noise on every unary entry, then on every pairwise entry.
pub fn perturb_pairwise<R: Rng + ?Sized>(model: &PairwiseModel, rng: &mut R) -> PairwiseModel {
    let mut out = perturb_unary(model, rng);
    for v in out.pairwise_all_mut() {
        *v += sample_gumbel(rng);
    }
    out
}

/// Independent Gumbel noise on every pairwise entry; isolated vertices get
/// unary noise so that every variable is perturbed exactly once.
pub fn perturb_edges<R: Rng + ?Sized>(model: &PairwiseModel, rng: &mut R) -> PairwiseModel {
    let mut out = model.clone();
    let mut covered = vec![false; model.num_vertices()];
    for &(i, j) in model.edges() {
        covered[i] = true;
        covered[j] = true;
    }
    for (i, &c) in covered.iter().enumerate() {
        if !c {
            for v in out.unary_mut(i) {
                *v += sample_gumbel(rng);
            }
        }
    }
    for v in out.pairwise_all_mut() {
        *v += sample_gumbel(rng);
    }
    out
}

/// Dispatches on a low-dimensional scheme. `Full` has no table form; use
/// [`perturb_full`].
pub fn perturb_low_dim<R: Rng + ?Sized>(
    model: &PairwiseModel,
    scheme: PerturbScheme,
    rng: &mut R,
) -> PairwiseModel {
    match scheme {
        PerturbScheme::Unary => perturb_unary(model, rng),
        PerturbScheme::Pairwise => perturb_pairwise(model, rng),
        PerturbScheme::Edges => perturb_edges(model, rng),
        PerturbScheme::Full => panic!("full perturbation has no pairwise-table form"),
    }
}

/// `θ(x) + γ(x)` for every configuration, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedTable {
    pub domain_sizes: Vec<usize>,
    pub values: Vec<f64>,
}

impl PerturbedTable {
    /// Index of the first maximal entry.
    pub fn argmax_index(&self) -> usize {
        argmax_first(&self.values)
    }

    pub fn argmax(&self) -> Assignment {
        Indexer::new(&self.domain_sizes).assignment(self.argmax_index())
    }

    pub fn max(&self) -> f64 {
        self.values[self.argmax_index()]
    }
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Full perturbation with the default state cap.
pub fn perturb_full<R: Rng + ?Sized>(model: &PairwiseModel, rng: &mut R) -> Result<PerturbedTable> {
    perturb_full_with(model, &ExactOracle::default(), rng)
}

pub fn perturb_full_with<R: Rng + ?Sized>(
    model: &PairwiseModel,
    oracle: &ExactOracle,
    rng: &mut R,
) -> Result<PerturbedTable> {
    let mut values = oracle.energies(model)?;
    for v in values.iter_mut() {
        *v += sample_gumbel(rng);
    }
    Ok(PerturbedTable {
        domain_sizes: model.domain_sizes().to_vec(),
        values,
    })
}
