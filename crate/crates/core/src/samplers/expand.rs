//! Replicated-subtree expansion of forests around an anchor edge.
//!
//! Orient the anchor's tree away from the anchor edge `(r, s)`. Every child
//! subtree is replicated `m` times and each copy is attached to its own copy of
//! the parent, so a vertex at depth `d` has `m^d` copies. Potentials and noise
//! of a depth-`d` copy are scaled by `m^-d`; the expanded energy of a
//! replica-constant assignment therefore equals the original energy, and the
//! expanded graph is again a forest.
//!
//! Maximizing the perturbed expanded model averages `m` independent perturbed
//! maxima per child subtree, which estimates each subtree's log partial
//! partition function. The anchor labels of the expanded MAP then approach the
//! Gibbs pair marginal of `(x_r, x_s)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::MarginalTable;
use crate::map::{solve_map, tree_map, Strategy};
use crate::model::{Assignment, ModelBuilder, PairwiseModel};
use crate::perturbation::{
    add_pairwise_noise, add_unary_noise, perturb_low_dim, sample_gumbel, PerturbScheme,
};
use crate::seed::{replicate, SeedPath};

use super::{SampleBatch, SamplerKind};

/// Upper limit on the size of an expanded model.
pub const EXPANSION_CAP: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedModel {
    pub model: PairwiseModel,
    /// Copies of each original vertex; `copy_map[v][0] == v`.
    pub copy_map: Vec<Vec<usize>>,
    /// Original vertex of each copy.
    pub origin: Vec<usize>,
    /// The anchor edge, in expanded (= original) vertex ids.
    pub anchor: (usize, usize),
    /// Scale applied to each copy's unary table.
    pub vertex_weight: Vec<f64>,
    /// Scale applied to each expanded edge's table.
    pub edge_weight: Vec<f64>,
}

impl ExpandedModel {
    /// Labels of the primary copies, an assignment of the original model.
    pub fn primary_assignment(&self, expanded: &Assignment) -> Assignment {
        Assignment(self.copy_map.iter().map(|c| expanded[c[0]]).collect())
    }

    /// Every copy takes its original vertex's label.
    pub fn replica_constant(&self, x: &Assignment) -> Assignment {
        Assignment(self.origin.iter().map(|&v| x[v]).collect())
    }

    /// Adds Gumbel noise scaled by the copy weights. `Edges` perturbs every
    /// expanded edge entry (and unary entries of isolated vertices), `Pairwise`
    /// additionally every unary entry, `Unary` only unary entries.
    pub fn perturb<R: Rng + ?Sized>(
        &self,
        scheme: PerturbScheme,
        rng: &mut R,
    ) -> Result<PairwiseModel> {
        let mut out = self.model.clone();
        match scheme {
            PerturbScheme::Unary => add_unary_noise(&mut out, Some(&self.vertex_weight), rng),
            PerturbScheme::Pairwise => {
                add_unary_noise(&mut out, Some(&self.vertex_weight), rng);
                add_pairwise_noise(&mut out, Some(&self.edge_weight), rng);
            }
            PerturbScheme::Edges => {
                let mut covered = vec![false; out.num_vertices()];
                for &(i, j) in out.edges() {
                    covered[i] = true;
                    covered[j] = true;
                }
                for (i, &c) in covered.iter().enumerate() {
                    if !c {
                        let w = self.vertex_weight[i];
                        for v in out.unary_mut(i) {
                            *v += w * sample_gumbel(rng);
                        }
                    }
                }
                add_pairwise_noise(&mut out, Some(&self.edge_weight), rng);
            }
            PerturbScheme::Full => {
                return Err(Error::InvalidInput(
                    "full perturbation does not apply to expanded models".into(),
                ))
            }
        }
        Ok(out)
    }
}

/// Builds the replicated-subtree expansion of a forest around `anchor`.
pub fn expand_tree(
    model: &PairwiseModel,
    anchor: (usize, usize),
    m: usize,
) -> Result<ExpandedModel> {
    if m < 1 {
        return Err(Error::InvalidInput(
            "replication count must be at least 1".into(),
        ));
    }
    if !model.is_forest() {
        return Err(Error::CycleDetected);
    }
    let (r, s) = anchor;
    let anchor_edge = model.find_edge(r, s).ok_or_else(|| {
        Error::InvalidInput(format!(
            "anchor edge ({r}, {s}) is not an edge of the model"
        ))
    })?;
    let n = model.num_vertices();
    let adj = model.incidences();

    // Orient the anchor component: BFS from r and s, skipping the anchor edge.
    let mut depth = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (child, edge)
    let mut order = vec![r, s];
    depth[r] = 0;
    depth[s] = 0;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for inc in &adj[v] {
            if inc.edge == anchor_edge || depth[inc.other] != usize::MAX {
                continue;
            }
            depth[inc.other] = depth[v] + 1;
            children[v].push((inc.other, inc.edge));
            order.push(inc.other);
        }
    }

    let mut total: u128 = 0;
    for v in 0..n {
        let copies = if depth[v] == usize::MAX {
            1
        } else {
            (m as u128).saturating_pow(depth[v] as u32)
        };
        total = total.saturating_add(copies);
    }
    if total > EXPANSION_CAP as u128 {
        return Err(Error::ExpansionTooLarge {
            size: total,
            cap: EXPANSION_CAP,
        });
    }

    let weight_of = |v: usize| {
        if depth[v] == usize::MAX {
            1.0
        } else {
            (m as f64).powi(-(depth[v] as i32))
        }
    };
    let scaled = |table: &[f64], w: f64| table.iter().map(|x| x * w).collect::<Vec<f64>>();

    let mut builder = ModelBuilder::new();
    let mut origin = Vec::with_capacity(total as usize);
    let mut vertex_weight = Vec::with_capacity(total as usize);
    let mut copy_map: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let w = weight_of(v);
        let id = builder.add_vertex(&scaled(model.unary(v), w));
        origin.push(v);
        vertex_weight.push(w);
        copy_map[v].push(id);
    }
    let mut edge_weight = Vec::new();
    let (ai, aj) = model.edges()[anchor_edge];
    builder.add_edge(ai, aj, model.pair_table(anchor_edge));
    edge_weight.push(1.0);

    for &v in &order {
        for &(c, e) in &children[v] {
            let w = weight_of(c);
            let unary = scaled(model.unary(c), w);
            // table oriented with the parent as row index
            let (i, _) = model.edges()[e];
            let table: Vec<f64> = if i == v {
                scaled(model.pair_table(e), w)
            } else {
                let (dv, dc) = (model.domain_size(v), model.domain_size(c));
                let t = model.pair_table(e);
                (0..dv)
                    .flat_map(|a| (0..dc).map(move |b| t[b * dv + a] * w))
                    .collect()
            };
            let parents = copy_map[v].clone();
            for (pk, &pc) in parents.iter().enumerate() {
                for k in 0..m {
                    let id = if pk == 0 && k == 0 {
                        c
                    } else {
                        let id = builder.add_vertex(&unary);
                        origin.push(c);
                        vertex_weight.push(w);
                        copy_map[c].push(id);
                        id
                    };
                    builder.add_edge(pc, id, &table);
                    edge_weight.push(w);
                }
            }
        }
    }
    for (e, &(i, j)) in model.edges().iter().enumerate() {
        if depth[i] == usize::MAX {
            builder.add_edge(i, j, model.pair_table(e));
            edge_weight.push(1.0);
        }
    }
    Ok(ExpandedModel {
        model: builder.finish_unchecked(),
        copy_map,
        origin,
        anchor: (r, s),
        vertex_weight,
        edge_weight,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMarginalEstimate {
    pub table: MarginalTable,
    pub draws: usize,
    pub replicas: usize,
    /// Set when the model has cycles and was perturbed without expansion,
    /// outside the approximation guarantee.
    pub heuristic: bool,
}

/// Empirical anchor-pair frequencies over `draws` perturbed MAP solves.
///
/// On a forest the model is expanded with `m` replicas and solved exactly by
/// max-product. On a graph with cycles the original model is perturbed
/// directly (no expansion) and solved with `Strategy::Auto`; the result is
/// flagged heuristic.
pub fn approx_pair_marginal(
    model: &PairwiseModel,
    anchor: (usize, usize),
    m: usize,
    draws: usize,
    scheme: PerturbScheme,
    seed: &SeedPath,
) -> Result<PairMarginalEstimate> {
    if draws == 0 {
        return Err(Error::InvalidInput("draw count must be at least 1".into()));
    }
    let (r, s) = anchor;
    if model.find_edge(r, s).is_none() {
        return Err(Error::InvalidInput(format!(
            "anchor edge ({r}, {s}) is not an edge of the model"
        )));
    }
    let heuristic = !model.is_forest();
    let pairs: Vec<(usize, usize)> = if heuristic {
        replicate(seed, draws, |_, rng| {
            let x = solve_map(&perturb_low_dim(model, scheme, rng), Strategy::Auto)?.argmax;
            Ok::<_, Error>((x[r], x[s]))
        })?
    } else {
        let expanded = expand_tree(model, anchor, m)?;
        replicate(seed, draws, |_, rng| {
            let x = tree_map(&expanded.perturb(scheme, rng)?)?.argmax;
            Ok::<_, Error>((x[r], x[s]))
        })?
    };
    let ds = model.domain_size(s);
    let mut probs = vec![0.0; model.domain_size(r) * ds];
    for (a, b) in pairs {
        probs[a * ds + b] += 1.0;
    }
    probs.iter_mut().for_each(|p| *p /= draws as f64);
    Ok(PairMarginalEstimate {
        table: MarginalTable {
            subset: vec![r, s],
            shape: vec![model.domain_size(r), ds],
            probs,
        },
        draws,
        replicas: if heuristic { 1 } else { m },
        heuristic,
    })
}

/// `draws` full assignments, each the primary-copy labels of one perturbed
/// MAP solve on the expansion around `anchor`. Only the anchor pair carries
/// the expansion's approximation guarantee.
pub fn expanded_map_batch(
    model: &PairwiseModel,
    anchor: (usize, usize),
    m: usize,
    scheme: PerturbScheme,
    draws: usize,
    seed: &SeedPath,
) -> Result<SampleBatch> {
    let start = std::time::Instant::now();
    let expanded = expand_tree(model, anchor, m)?;
    let samples = replicate(seed, draws, |_, rng| {
        Ok::<_, Error>(
            expanded.primary_assignment(&tree_map(&expanded.perturb(scheme, rng)?)?.argmax),
        )
    })?;
    Ok(SampleBatch {
        samples,
        sampler: SamplerKind::ApproxExpanded,
        seed: Some(seed.clone()),
        restarts: 0,
        heuristic: false,
        wall_time: start.elapsed(),
    })
}
