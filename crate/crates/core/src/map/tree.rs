//! Max-product dynamic programming on forests.

use super::{MapResult, SolverKind};
use crate::error::{Error, Result};
use crate::model::{Assignment, Incidence, PairwiseModel};

/// Exact MAP on a forest. Each component is rooted at its smallest vertex;
/// messages flow leaf to root, then labels are backtracked root to leaf,
/// taking the smallest label among equal maxima at every step.
pub fn tree_map(model: &PairwiseModel) -> Result<MapResult> {
    if !model.is_forest() {
        return Err(Error::CycleDetected);
    }
    let n = model.num_vertices();
    let adj = model.incidences();
    let mut labels = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut parent: Vec<Option<Incidence>> = vec![None; n];
    let mut belief: Vec<Vec<f64>> = (0..n).map(|i| model.unary(i).to_vec()).collect();
    let mut best: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut ties = false;

    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut order = vec![root];
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for inc in &adj[v] {
                if !visited[inc.other] {
                    visited[inc.other] = true;
                    // incidence as seen from the child, pointing at v
                    parent[inc.other] = Some(Incidence {
                        edge: inc.edge,
                        other: v,
                        first: !inc.first,
                    });
                    order.push(inc.other);
                }
            }
        }
        for &v in order.iter().skip(1).rev() {
            let up = parent[v].expect("non-root vertex has a parent");
            let p = up.other;
            let dp = model.domain_size(p);
            let mut choice = vec![0usize; dp];
            for (xp, slot) in choice.iter_mut().enumerate() {
                let mut top = f64::NEG_INFINITY;
                let mut arg = 0;
                for (xv, b) in belief[v].iter().enumerate() {
                    let score = b + model.incident_value(&up, xv, xp);
                    if score > top {
                        top = score;
                        arg = xv;
                    } else if score == top && top.is_finite() {
                        ties = true;
                    }
                }
                *slot = arg;
                belief[p][xp] += top;
            }
            best[v] = choice;
        }
        let (mut top, mut arg) = (f64::NEG_INFINITY, 0);
        for (x, &b) in belief[root].iter().enumerate() {
            if b > top {
                top = b;
                arg = x;
            } else if b == top && top.is_finite() {
                ties = true;
            }
        }
        if top == f64::NEG_INFINITY {
            return Err(Error::Infeasible);
        }
        labels[root] = arg;
        for &v in order.iter().skip(1) {
            let p = parent[v].expect("non-root vertex has a parent").other;
            labels[v] = best[v][labels[p]];
        }
    }
    let argmax = Assignment(labels);
    let value = model.energy_unchecked(&argmax.0);
    Ok(MapResult {
        argmax,
        value,
        solver: SolverKind::Tree,
        ties_possible: ties,
    })
}
