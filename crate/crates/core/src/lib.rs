//! Sampling from Gibbs distributions of discrete pairwise models by solving
//! randomly perturbed MAP problems.
//!
//! A model assigns every configuration `x` the potential `θ(x)`, a sum of
//! unary and pairwise table entries, and induces `p(x) ∝ exp(θ(x))`. The crate
//! provides:
//!
//! * [`model`]: pairwise models, the spin-glass generator and the JSON format;
//! * [`exact`]: brute-force log-partition, marginals and exact sampling;
//! * [`perturbation`]: zero-mean Gumbel noise at full, unary and pairwise
//!   granularity;
//! * [`map`]: exhaustive, tree (max-product) and graph-cut MAP solvers;
//! * [`samplers`]: Gumbel-max sampling, approximate perturb-and-MAP sampling
//!   with tree expansion, and the sequential rejection sampler driven by
//!   self-reducible upper bounds;
//! * [`bounds`]: upper and lower bounds on `log Z`;
//! * [`baselines`]: single-site Gibbs and Metropolis chains;
//! * [`experiment`]: the spin-glass experiment harness that writes CSV.
//!
//! All randomness flows from [`seed::SeedPath`], a counter-style derivation of
//! independent ChaCha streams, so every Monte Carlo result is replayable.

pub mod baselines;
pub mod bounds;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod map;
pub mod model;
pub mod perturbation;
pub mod samplers;
pub mod seed;

pub use error::{Error, Result};
pub use model::{Assignment, PairwiseModel, SpinGlassConfig};
pub use seed::SeedPath;
