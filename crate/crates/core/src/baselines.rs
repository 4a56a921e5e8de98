//! Single-site MCMC reference samplers: Gibbs and Metropolis.
//!
//! A sweep visits every vertex once (systematic scan, in vertex order) or
//! `n` uniformly chosen vertices (random scan). States after sweep `s` are
//! emitted when `s ≥ burn_in` and `(s - burn_in) % thin == 0`.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{solve_map, Strategy};
use crate::model::{Assignment, Incidence, PairwiseModel};
use crate::samplers::{SampleBatch, SamplerKind};
use crate::seed::{replicate, SeedPath};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainInit {
    /// Uniform labels; must land on a feasible state.
    Random,
    /// The MAP assignment.
    Map,
    Fixed(Assignment),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scan {
    Systematic,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Total sweeps including burn-in.
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub init: ChainInit,
    pub scan: Scan,
}

impl ChainConfig {
    /// Burn-in of `sweeps / 10`, no thinning, random start, systematic scan.
    pub fn new(sweeps: usize) -> Self {
        ChainConfig {
            sweeps,
            burn_in: sweeps / 10,
            thin: 1,
            init: ChainInit::Random,
            scan: Scan::Systematic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return Err(Error::InvalidInput(format!(
                "sweeps ({}) must exceed burn-in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.thin < 1 {
            return Err(Error::InvalidInput("thin must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of states a chain emits.
    pub fn emitted(&self) -> usize {
        (self.sweeps - self.burn_in).div_ceil(self.thin)
    }
}

/// Local conditionals of a model, shared by both chains.
#[derive(Debug, Clone)]
pub struct SiteKernel<'m> {
    model: &'m PairwiseModel,
    incidences: Vec<Vec<Incidence>>,
}

impl<'m> SiteKernel<'m> {
    pub fn new(model: &'m PairwiseModel) -> Self {
        SiteKernel {
            model,
            incidences: model.incidences(),
        }
    }

    /// `θ_v(l) + Σ_{(v,u)} θ_vu(l, x_u)`: the part of `θ(x)` that depends on `x_v`.
    pub fn local_energy(&self, x: &[usize], v: usize, l: usize) -> f64 {
        let mut e = self.model.unary(v)[l];
        for inc in &self.incidences[v] {
            e += self.model.incident_value(inc, l, x[inc.other]);
        }
        e
    }

    /// Resamples `x_v` from its exact conditional.
    pub fn gibbs_step<R: Rng + ?Sized>(&self, x: &mut [usize], v: usize, rng: &mut R) {
        let d = self.model.domain_size(v);
        let logits: Vec<f64> = (0..d).map(|l| self.local_energy(x, v, l)).collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|&e| (e - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        for (l, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                x[v] = l;
                return;
            }
        }
        x[v] = weights.iter().rposition(|&w| w > 0.0).unwrap_or(x[v]);
    }

    /// Proposes a uniformly chosen different label for `x_v` and accepts with
    /// probability `min(1, exp(Δθ))`. Returns whether the move was accepted.
    pub fn metropolis_step<R: Rng + ?Sized>(&self, x: &mut [usize], v: usize, rng: &mut R) -> bool {
        let d = self.model.domain_size(v);
        if d < 2 {
            return false;
        }
        let mut proposal = rng.gen_range(0..d - 1);
        if proposal >= x[v] {
            proposal += 1;
        }
        let delta = self.local_energy(x, v, proposal) - self.local_energy(x, v, x[v]);
        let accept = delta >= 0.0 || rng.gen::<f64>() < delta.exp();
        if accept {
            x[v] = proposal;
        }
        accept
    }
}

#[derive(Clone, Copy)]
enum Kernel {
    Gibbs,
    Metropolis,
}

fn initial_state<R: Rng + ?Sized>(
    model: &PairwiseModel,
    init: &ChainInit,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let x = match init {
        ChainInit::Random => model
            .domain_sizes()
            .iter()
            .map(|&d| rng.gen_range(0..d))
            .collect(),
        ChainInit::Map => solve_map(model, Strategy::Auto)?.argmax.0,
        ChainInit::Fixed(a) => {
            model.check_assignment(a)?;
            a.0.clone()
        }
    };
    if model.energy_unchecked(&x) == f64::NEG_INFINITY {
        return Err(Error::InvalidInput(
            "initial chain state is infeasible".into(),
        ));
    }
    Ok(x)
}

fn run_chain<R: Rng + ?Sized>(
    model: &PairwiseModel,
    cfg: &ChainConfig,
    kernel: Kernel,
    rng: &mut R,
) -> Result<SampleBatch> {
    cfg.validate()?;
    let start = Instant::now();
    let k = SiteKernel::new(model);
    let mut x = initial_state(model, &cfg.init, rng)?;
    let n = model.num_vertices();
    let mut samples = Vec::with_capacity(cfg.emitted());
    for sweep in 0..cfg.sweeps {
        for step in 0..n {
            let v = match cfg.scan {
                Scan::Systematic => step,
                Scan::Random => rng.gen_range(0..n),
            };
            match kernel {
                Kernel::Gibbs => k.gibbs_step(&mut x, v, rng),
                Kernel::Metropolis => {
                    k.metropolis_step(&mut x, v, rng);
                }
            }
        }
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0 {
            samples.push(Assignment(x.clone()));
        }
    }
    Ok(SampleBatch {
        samples,
        sampler: match kernel {
            Kernel::Gibbs => SamplerKind::Gibbs,
            Kernel::Metropolis => SamplerKind::Metropolis,
        },
        seed: None,
        restarts: 0,
        heuristic: false,
        wall_time: start.elapsed(),
    })
}

/// Single-site Gibbs sampler.
pub fn gibbs_chain<R: Rng + ?Sized>(
    model: &PairwiseModel,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<SampleBatch> {
    run_chain(model, cfg, Kernel::Gibbs, rng)
}

/// Single-site Metropolis sampler with uniform proposals.
pub fn metropolis_chain<R: Rng + ?Sized>(
    model: &PairwiseModel,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<SampleBatch> {
    run_chain(model, cfg, Kernel::Metropolis, rng)
}

/// `chains` independent chains, chain `k` on `seed.child(k)`, pooled in
/// chain order.
pub fn parallel_chains(
    model: &PairwiseModel,
    cfg: &ChainConfig,
    sampler: SamplerKind,
    chains: usize,
    seed: &SeedPath,
) -> Result<SampleBatch> {
    let kernel = match sampler {
        SamplerKind::Gibbs => Kernel::Gibbs,
        SamplerKind::Metropolis => Kernel::Metropolis,
        other => {
            return Err(Error::InvalidInput(format!(
                "{other:?} is not an MCMC sampler"
            )))
        }
    };
    let start = Instant::now();
    let batches = replicate(seed, chains, |_, rng| run_chain(model, cfg, kernel, rng))?;
    Ok(SampleBatch {
        samples: batches.into_iter().flat_map(|b| b.samples).collect(),
        sampler,
        seed: Some(seed.clone()),
        restarts: 0,
        heuristic: false,
        wall_time: start.elapsed(),
    })
}
