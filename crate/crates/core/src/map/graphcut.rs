//! Exact MAP for attractive binary models by minimum s-t cut.
//!
//! Maximizing `θ` is minimizing `E = -θ`. Each pairwise table
//! `E_ij = (A, B; C, D)` is written as
//! `A + (C - A) x_i + (D - C) x_j + (B + C - A - D)(1 - x_i) x_j`,
//! whose last coefficient is non-negative exactly when `θ_ij` is
//! supermodular. Label 0 is the source side of the cut, label 1 the sink side.

use super::flow::FlowNetwork;
use super::{MapResult, SolverKind};
use crate::error::{Error, Result};
use crate::model::{Assignment, PairwiseModel};

pub fn graphcut_map(model: &PairwiseModel) -> Result<MapResult> {
    if !model.is_attractive() {
        return Err(Error::NotAttractive);
    }
    if !model.all_finite() {
        return Err(Error::InfiniteEntries);
    }
    let n = model.num_vertices();
    let (source, sink) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2, source, sink);
    let mut linear: Vec<f64> = (0..n)
        .map(|i| model.unary(i)[0] - model.unary(i)[1])
        .collect();
    for (e, &(i, j)) in model.edges().iter().enumerate() {
        let t = model.pair_table(e);
        let (a, b, c, d) = (-t[0], -t[1], -t[2], -t[3]);
        linear[i] += c - a;
        linear[j] += d - c;
        let w = (b + c - a - d).max(0.0);
        net.add_arc(i, j, w);
    }
    for (i, &a) in linear.iter().enumerate() {
        if a > 0.0 {
            net.add_arc(source, i, a);
        } else if a < 0.0 {
            net.add_arc(i, sink, -a);
        }
    }
    net.max_flow();
    let source_side = net.source_side();
    let sink_side = net.sink_side();
    let labels: Vec<usize> = (0..n).map(|i| usize::from(!source_side[i])).collect();
    // The minimum cut is unique iff every node is on one of the two residual
    // reachability sets.
    let ties_possible = (0..n).any(|i| !source_side[i] && !sink_side[i]);
    let argmax = Assignment(labels);
    let value = model.energy_unchecked(&argmax.0);
    Ok(MapResult {
        argmax,
        value,
        solver: SolverKind::GraphCut,
        ties_possible,
    })
}
