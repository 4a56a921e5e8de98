//! MAP solvers: `argmax_x θ(x)`.
//!
//! | solver       | requirement                         | tie rule                         |
//! |--------------|-------------------------------------|----------------------------------|
//! | exhaustive   | state space under the oracle cap    | lexicographically smallest       |
//! | tree         | edge graph is a forest              | smallest label when backtracking |
//! | graph cut    | attractive binary, finite entries   | source-reachable set gets label 0|
//!
//! `MapResult::value` is always `θ(argmax)` recomputed from the model.

mod flow;
mod graphcut;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{for_each_in_range, ExactOracle};
use crate::model::{Assignment, PairwiseModel};

pub use flow::FlowNetwork;
pub use graphcut::graphcut_map;
pub use tree::tree_map;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Exhaustive,
    Tree,
    GraphCut,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Graph cut if attractive and finite, else tree if a forest, else exhaustive.
    #[default]
    Auto,
    Exhaustive,
    Tree,
    #[value(name = "graphcut")]
    #[serde(rename = "graphcut")]
    GraphCut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapResult {
    pub argmax: Assignment,
    pub value: f64,
    pub solver: SolverKind,
    /// Whether the solver saw another optimum of equal value.
    pub ties_possible: bool,
}

/// Exhaustive search under the default state cap.
pub fn exhaustive_map(model: &PairwiseModel) -> Result<MapResult> {
    exhaustive_map_with(model, &ExactOracle::default())
}

pub fn exhaustive_map_with(model: &PairwiseModel, oracle: &ExactOracle) -> Result<MapResult> {
    let states = oracle.states(model)?;
    let mut best_value = f64::NEG_INFINITY;
    let mut best: Vec<usize> = Vec::new();
    let mut ties = false;
    for_each_in_range(model, 0, states, |labels, e| {
        if e > best_value || best.is_empty() && e == best_value {
            best_value = e;
            best.clear();
            best.extend_from_slice(labels);
            ties = false;
        } else if e == best_value && e.is_finite() {
            ties = true;
        }
    });
    if best_value == f64::NEG_INFINITY {
        return Err(Error::Infeasible);
    }
    let argmax = Assignment(best);
    let value = model.energy_unchecked(&argmax.0);
    Ok(MapResult {
        argmax,
        value,
        solver: SolverKind::Exhaustive,
        ties_possible: ties,
    })
}

/// Which concrete solver `Auto` picks for `model`.
pub fn auto_solver(model: &PairwiseModel) -> SolverKind {
    if model.is_attractive() && model.all_finite() {
        SolverKind::GraphCut
    } else if model.is_forest() {
        SolverKind::Tree
    } else {
        SolverKind::Exhaustive
    }
}

pub fn solve_map(model: &PairwiseModel, strategy: Strategy) -> Result<MapResult> {
    let kind = match strategy {
        Strategy::Auto => auto_solver(model),
        Strategy::Exhaustive => SolverKind::Exhaustive,
        Strategy::Tree => SolverKind::Tree,
        Strategy::GraphCut => SolverKind::GraphCut,
    };
    match kind {
        SolverKind::Exhaustive => exhaustive_map(model),
        SolverKind::Tree => tree_map(model),
        SolverKind::GraphCut => graphcut_map(model),
    }
}
