//! Discrete pairwise models `θ(x) = Σ_i θ_i(x_i) + Σ_(i,j) θ_ij(x_i, x_j)`.
//!
//! Potentials are dense tables. An entry equal to `f64::NEG_INFINITY` excludes
//! the corresponding labels; it is absorbing under addition, so the energy of a
//! configuration touching any excluded entry is `-inf`.
//!
//! The JSON form is
//!
//! ```json
//! {"domain_sizes":[2,2],"unary":[[0.0,1.0],[0.0,"-inf"]],
//!  "edges":[[0,1]],"pairwise":[[[0.5,-0.5],[-0.5,0.5]]]}
//! ```
//!
//! where `pairwise[e][a][b] = θ_ij(a, b)` for `edges[e] = [i, j]` and `-inf`
//! is written as the string `"-inf"`.

use std::collections::HashSet;
use std::fmt;

use rand::distributions::{Distribution, Uniform};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed::SeedPath;

/// One label index per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn new(labels: Vec<usize>) -> Self {
        Assignment(labels)
    }

    pub fn zeros(n: usize) -> Self {
        Assignment(vec![0; n])
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for Assignment {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// A single invariant violation reported by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyDomain {
        vertex: usize,
    },
    UnaryShape {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    UnaryCount {
        expected: usize,
        found: usize,
    },
    PairwiseCount {
        expected: usize,
        found: usize,
    },
    PairwiseShape {
        edge: usize,
        expected: (usize, usize),
        found: (usize, Option<usize>),
    },
    EdgeOutOfRange {
        edge: usize,
        vertex: usize,
    },
    SelfLoop {
        edge: usize,
    },
    DuplicateEdge {
        edge: usize,
    },
    NotANumber {
        location: String,
    },
    PositiveInfinity {
        location: String,
    },
    Infeasible,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyDomain { vertex } => write!(f, "vertex {vertex} has an empty domain"),
            Violation::UnaryShape {
                vertex,
                expected,
                found,
            } => {
                write!(
                    f,
                    "unary table of vertex {vertex} has {found} entries, expected {expected}"
                )
            }
            Violation::UnaryCount { expected, found } => {
                write!(f, "{found} unary tables for {expected} vertices")
            }
            Violation::PairwiseCount { expected, found } => {
                write!(f, "{found} pairwise tables for {expected} edges")
            }
            Violation::PairwiseShape {
                edge,
                expected,
                found,
            } => write!(
                f,
                "pairwise table of edge {edge} has shape {}x{}, expected {}x{}",
                found.0,
                found.1.map_or("?".to_string(), |c| c.to_string()),
                expected.0,
                expected.1
            ),
            Violation::EdgeOutOfRange { edge, vertex } => {
                write!(
                    f,
                    "edge {edge} references vertex {vertex} which does not exist"
                )
            }
            Violation::SelfLoop { edge } => write!(f, "edge {edge} is a self-loop"),
            Violation::DuplicateEdge { edge } => write!(f, "edge {edge} repeats an earlier pair"),
            Violation::NotANumber { location } => write!(f, "NaN potential at {location}"),
            Violation::PositiveInfinity { location } => write!(f, "+inf potential at {location}"),
            Violation::Infeasible => write!(f, "every configuration has energy -inf"),
        }
    }
}

/// A potential value that serializes `-inf` as the string `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential(pub f64);

impl Serialize for Potential {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Potential {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PotentialVisitor;
        impl Visitor<'_> for PotentialVisitor {
            type Value = Potential;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or the string \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Potential, E> {
                Ok(Potential(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Potential, E> {
                Ok(Potential(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Potential, E> {
                Ok(Potential(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Potential, E> {
                match v {
                    "-inf" => Ok(Potential(f64::NEG_INFINITY)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(PotentialVisitor)
    }
}

/// Unchecked model tables, exactly as they appear in the JSON format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawModel {
    pub domain_sizes: Vec<usize>,
    pub unary: Vec<Vec<Potential>>,
    pub edges: Vec<[usize; 2]>,
    pub pairwise: Vec<Vec<Vec<Potential>>>,
}

/// Returns every invariant violation of `raw`; an empty list means the tables
/// describe a valid, feasible model.
pub fn validate(raw: &RawModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = raw.domain_sizes.len();
    for (i, &d) in raw.domain_sizes.iter().enumerate() {
        if d == 0 {
            out.push(Violation::EmptyDomain { vertex: i });
        }
    }
    if raw.unary.len() != n {
        out.push(Violation::UnaryCount {
            expected: n,
            found: raw.unary.len(),
        });
    }
    for (i, table) in raw.unary.iter().enumerate().take(n) {
        if table.len() != raw.domain_sizes[i] {
            out.push(Violation::UnaryShape {
                vertex: i,
                expected: raw.domain_sizes[i],
                found: table.len(),
            });
        }
        check_values(
            table.iter().map(|p| p.0),
            || format!("unary[{i}]"),
            &mut out,
        );
    }
    if raw.pairwise.len() != raw.edges.len() {
        out.push(Violation::PairwiseCount {
            expected: raw.edges.len(),
            found: raw.pairwise.len(),
        });
    }
    let mut seen = HashSet::new();
    for (e, &[i, j]) in raw.edges.iter().enumerate() {
        let mut in_range = true;
        for v in [i, j] {
            if v >= n {
                out.push(Violation::EdgeOutOfRange { edge: e, vertex: v });
                in_range = false;
            }
        }
        if i == j {
            out.push(Violation::SelfLoop { edge: e });
        } else if !seen.insert((i.min(j), i.max(j))) {
            out.push(Violation::DuplicateEdge { edge: e });
        }
        if let Some(table) = raw.pairwise.get(e) {
            if in_range {
                let expected = (raw.domain_sizes[i], raw.domain_sizes[j]);
                let cols = table.first().map(|r| r.len());
                let ragged = table.iter().any(|r| Some(r.len()) != cols);
                if table.len() != expected.0
                    || (expected.0 > 0 && (ragged || cols != Some(expected.1)))
                {
                    out.push(Violation::PairwiseShape {
                        edge: e,
                        expected,
                        found: (table.len(), if ragged { None } else { cols }),
                    });
                }
            }
            check_values(
                table.iter().flatten().map(|p| p.0),
                || format!("pairwise[{e}]"),
                &mut out,
            );
        }
    }
    if out.is_empty() {
        let model = PairwiseModel::from_raw_unchecked(raw);
        if !model.is_feasible() {
            out.push(Violation::Infeasible);
        }
    }
    out
}

fn check_values(
    values: impl Iterator<Item = f64>,
    location: impl Fn() -> String,
    out: &mut Vec<Violation>,
) {
    for v in values {
        if v.is_nan() {
            out.push(Violation::NotANumber {
                location: location(),
            });
            return;
        }
        if v == f64::INFINITY {
            out.push(Violation::PositiveInfinity {
                location: location(),
            });
            return;
        }
    }
}

/// Incidence record: edge `edge` connects this vertex to `other`; `first` is
/// true when this vertex is the row index of the edge's table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    pub other: usize,
    pub first: bool,
}

/// A validated discrete pairwise model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseModel {
    domain_sizes: Vec<usize>,
    unary_offsets: Vec<usize>,
    unary: Vec<f64>,
    edges: Vec<(usize, usize)>,
    pair_offsets: Vec<usize>,
    pairwise: Vec<f64>,
}

impl PairwiseModel {
    /// Builds a model from nested tables. `pairwise[e]` is row-major with
    /// `|X_i|` rows for `edges[e] = (i, j)`.
    pub fn new(
        domain_sizes: Vec<usize>,
        unary: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
        pairwise: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let raw = RawModel {
            domain_sizes,
            unary: unary
                .into_iter()
                .map(|t| t.into_iter().map(Potential).collect())
                .collect(),
            edges: edges.into_iter().map(|(i, j)| [i, j]).collect(),
            pairwise: pairwise
                .into_iter()
                .map(|t| {
                    t.into_iter()
                        .map(|r| r.into_iter().map(Potential).collect())
                        .collect()
                })
                .collect(),
        };
        Self::from_raw(&raw)
    }

    /// A model with no edges.
    pub fn independent(unary: Vec<Vec<f64>>) -> Result<Self> {
        let domain_sizes = unary.iter().map(Vec::len).collect();
        Self::new(domain_sizes, unary, Vec::new(), Vec::new())
    }

    /// All-zero potentials over the given domains and edges.
    pub fn uniform(domain_sizes: Vec<usize>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let unary = domain_sizes.iter().map(|&d| vec![0.0; d]).collect();
        let pairwise = edges
            .iter()
            .map(|&(i, j)| {
                vec![
                    vec![0.0; *domain_sizes.get(j).unwrap_or(&0)];
                    *domain_sizes.get(i).unwrap_or(&0)
                ]
            })
            .collect();
        Self::new(domain_sizes, unary, edges, pairwise)
    }

    pub fn from_raw(raw: &RawModel) -> Result<Self> {
        let violations = validate(raw);
        if !violations.is_empty() {
            return Err(Error::InvalidModel(violations));
        }
        Ok(Self::from_raw_unchecked(raw))
    }

    fn from_raw_unchecked(raw: &RawModel) -> Self {
        let mut builder = ModelBuilder::new();
        for (d, table) in raw.domain_sizes.iter().zip(&raw.unary) {
            let values: Vec<f64> = table.iter().map(|p| p.0).collect();
            debug_assert_eq!(values.len(), *d);
            builder.add_vertex(&values);
        }
        for (&[i, j], table) in raw.edges.iter().zip(&raw.pairwise) {
            let values: Vec<f64> = table.iter().flatten().map(|p| p.0).collect();
            builder.add_edge(i, j, &values);
        }
        builder.finish_unchecked()
    }

    pub fn to_raw(&self) -> RawModel {
        RawModel {
            domain_sizes: self.domain_sizes.clone(),
            unary: (0..self.num_vertices())
                .map(|i| self.unary(i).iter().copied().map(Potential).collect())
                .collect(),
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
            pairwise: (0..self.num_edges())
                .map(|e| {
                    let cols = self.domain_sizes[self.edges[e].1];
                    self.pair_table(e)
                        .chunks(cols.max(1))
                        .map(|r| r.iter().copied().map(Potential).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_raw()).expect("model tables always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawModel = serde_json::from_str(s)?;
        Self::from_raw(&raw)
    }

    pub fn num_vertices(&self) -> usize {
        self.domain_sizes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn domain_sizes(&self) -> &[usize] {
        &self.domain_sizes
    }

    pub fn domain_size(&self, i: usize) -> usize {
        self.domain_sizes[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn unary(&self, i: usize) -> &[f64] {
        &self.unary[self.unary_offsets[i]..self.unary_offsets[i + 1]]
    }

    pub(crate) fn unary_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.unary[self.unary_offsets[i]..self.unary_offsets[i + 1]]
    }

    /// Row-major table of edge `e = (i, j)`: entry `a * |X_j| + b` is `θ_ij(a, b)`.
    pub fn pair_table(&self, e: usize) -> &[f64] {
        &self.pairwise[self.pair_offsets[e]..self.pair_offsets[e + 1]]
    }

    pub(crate) fn pair_table_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.pairwise[self.pair_offsets[e]..self.pair_offsets[e + 1]]
    }

    /// `θ_ij(a, b)` for edge `e = (i, j)`.
    #[inline]
    pub fn pair_value(&self, e: usize, a: usize, b: usize) -> f64 {
        let cols = self.domain_sizes[self.edges[e].1];
        self.pairwise[self.pair_offsets[e] + a * cols + b]
    }

    /// Pairwise value seen from an incidence: `own` is the label of the vertex
    /// holding the incidence, `other` the label of its neighbour.
    #[inline]
    pub fn incident_value(&self, inc: &Incidence, own: usize, other: usize) -> f64 {
        if inc.first {
            self.pair_value(inc.edge, own, other)
        } else {
            self.pair_value(inc.edge, other, own)
        }
    }

    pub(crate) fn unary_all_mut(&mut self) -> &mut [f64] {
        &mut self.unary
    }

    pub(crate) fn pairwise_all_mut(&mut self) -> &mut [f64] {
        &mut self.pairwise
    }

    /// Adjacency lists in edge order.
    pub fn incidences(&self) -> Vec<Vec<Incidence>> {
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            adj[i].push(Incidence {
                edge: e,
                other: j,
                first: true,
            });
            adj[j].push(Incidence {
                edge: e,
                other: i,
                first: false,
            });
        }
        adj
    }

    /// `Π_i |X_i|`, or `None` on overflow.
    pub fn state_space_size(&self) -> Option<u128> {
        self.domain_sizes
            .iter()
            .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
    }

    pub fn check_assignment(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.num_vertices() {
            return Err(Error::InvalidInput(format!(
                "assignment has {} labels for {} vertices",
                x.len(),
                self.num_vertices()
            )));
        }
        for (i, (&l, &d)) in x.0.iter().zip(&self.domain_sizes).enumerate() {
            if l >= d {
                return Err(Error::InvalidInput(format!(
                    "label {l} out of range for vertex {i} (domain {d})"
                )));
            }
        }
        Ok(())
    }

    /// `θ(x)`; `-inf` when any term is excluded.
    pub fn energy(&self, x: &Assignment) -> Result<f64> {
        self.check_assignment(x)?;
        Ok(self.energy_unchecked(&x.0))
    }

    #[inline]
    pub(crate) fn energy_unchecked(&self, x: &[usize]) -> f64 {
        let mut total = 0.0;
        for (i, &l) in x.iter().enumerate() {
            total += self.unary[self.unary_offsets[i] + l];
        }
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            total += self.pair_value(e, x[i], x[j]);
        }
        total
    }

    pub fn all_finite(&self) -> bool {
        self.unary
            .iter()
            .chain(&self.pairwise)
            .all(|v| v.is_finite())
    }

    /// True iff every vertex is binary and every pairwise table is
    /// supermodular: `θ(0,0) + θ(1,1) ≥ θ(0,1) + θ(1,0)`.
    pub fn is_attractive(&self) -> bool {
        self.domain_sizes.iter().all(|&d| d == 2)
            && (0..self.num_edges()).all(|e| {
                let t = self.pair_table(e);
                t[0] + t[3] >= t[1] + t[2]
            })
    }

    /// True iff the edge graph has no cycle.
    pub fn is_forest(&self) -> bool {
        let mut dsu = DisjointSets::new(self.num_vertices());
        self.edges.iter().all(|&(i, j)| dsu.union(i, j))
    }

    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|&(i, j)| (i, j) == (a, b) || (i, j) == (b, a))
    }

    fn is_feasible(&self) -> bool {
        if self.all_finite() {
            return true;
        }
        if (0..self.num_vertices()).any(|i| self.unary(i).iter().all(|v| *v == f64::NEG_INFINITY)) {
            return false;
        }
        if self.is_forest() {
            return crate::map::tree_map(self).is_ok();
        }
        match self.state_space_size() {
            Some(states) if states <= 1 << 20 => crate::map::exhaustive_map(self).is_ok(),
            _ => self.arc_consistent(),
        }
    }

    /// AC-3 over the finite-entry relation; a necessary condition for
    /// feasibility used on models too large to check exactly.
    fn arc_consistent(&self) -> bool {
        let adj = self.incidences();
        let mut alive: Vec<Vec<bool>> = (0..self.num_vertices())
            .map(|i| self.unary(i).iter().map(|v| v.is_finite()).collect())
            .collect();
        let mut queue: std::collections::VecDeque<usize> = (0..self.num_vertices()).collect();
        let mut queued = vec![true; self.num_vertices()];
        while let Some(v) = queue.pop_front() {
            queued[v] = false;
            for inc in &adj[v] {
                let u = inc.other;
                let mut changed = false;
                for a in 0..self.domain_sizes[u] {
                    if !alive[u][a] {
                        continue;
                    }
                    let back = Incidence {
                        edge: inc.edge,
                        other: v,
                        first: !inc.first,
                    };
                    let supported = (0..self.domain_sizes[v])
                        .any(|b| alive[v][b] && self.incident_value(&back, a, b).is_finite());
                    if !supported {
                        alive[u][a] = false;
                        changed = true;
                    }
                }
                if changed {
                    if !alive[u].iter().any(|&x| x) {
                        return false;
                    }
                    if !queued[u] {
                        queued[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        true
    }

    /// Clamps the listed vertices to fixed labels.
    ///
    /// Returns the model over the remaining vertices (in increasing original
    /// order), the constant collected from clamped terms, and the original id
    /// of every free vertex. For every completion `y` of the free vertices,
    /// `θ(x) = constant + θ_free(y)`. The reduced model is not re-validated for
    /// feasibility; the constant is `-inf` when the clamp itself is excluded.
    pub fn condition(&self, clamps: &[(usize, usize)]) -> (PairwiseModel, f64, Vec<usize>) {
        let n = self.num_vertices();
        let mut fixed: Vec<Option<usize>> = vec![None; n];
        for &(v, l) in clamps {
            fixed[v] = Some(l);
        }
        let mut new_id = vec![usize::MAX; n];
        let mut free = Vec::new();
        for v in 0..n {
            if fixed[v].is_none() {
                new_id[v] = free.len();
                free.push(v);
            }
        }
        let mut constant = 0.0;
        let mut unary: Vec<Vec<f64>> = Vec::with_capacity(free.len());
        for v in 0..n {
            match fixed[v] {
                Some(l) => constant += self.unary(v)[l],
                None => unary.push(self.unary(v).to_vec()),
            }
        }
        let mut builder = ModelBuilder::new();
        let mut kept_edges = Vec::new();
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            match (fixed[i], fixed[j]) {
                (Some(a), Some(b)) => constant += self.pair_value(e, a, b),
                (Some(a), None) => {
                    for (b, u) in unary[new_id[j]].iter_mut().enumerate() {
                        *u += self.pair_value(e, a, b);
                    }
                }
                (None, Some(b)) => {
                    for (a, u) in unary[new_id[i]].iter_mut().enumerate() {
                        *u += self.pair_value(e, a, b);
                    }
                }
                (None, None) => kept_edges.push(e),
            }
        }
        for table in &unary {
            builder.add_vertex(table);
        }
        for e in kept_edges {
            let (i, j) = self.edges[e];
            builder.add_edge(new_id[i], new_id[j], self.pair_table(e));
        }
        (builder.finish_unchecked(), constant, free)
    }
}

/// Incremental construction of flat-table models.
#[derive(Debug, Default)]
pub(crate) struct ModelBuilder {
    domain_sizes: Vec<usize>,
    unary_offsets: Vec<usize>,
    unary: Vec<f64>,
    edges: Vec<(usize, usize)>,
    pair_offsets: Vec<usize>,
    pairwise: Vec<f64>,
}

impl ModelBuilder {
    pub(crate) fn new() -> Self {
        ModelBuilder {
            unary_offsets: vec![0],
            pair_offsets: vec![0],
            ..Default::default()
        }
    }

    pub(crate) fn add_vertex(&mut self, table: &[f64]) -> usize {
        self.domain_sizes.push(table.len());
        self.unary.extend_from_slice(table);
        self.unary_offsets.push(self.unary.len());
        self.domain_sizes.len() - 1
    }

    /// `table` is row-major over `(x_i, x_j)`.
    pub(crate) fn add_edge(&mut self, i: usize, j: usize, table: &[f64]) -> usize {
        self.edges.push((i, j));
        self.pairwise.extend_from_slice(table);
        self.pair_offsets.push(self.pairwise.len());
        self.edges.len() - 1
    }

    pub(crate) fn finish_unchecked(self) -> PairwiseModel {
        PairwiseModel {
            domain_sizes: self.domain_sizes,
            unary_offsets: self.unary_offsets,
            unary: self.unary,
            edges: self.edges,
            pair_offsets: self.pair_offsets,
            pairwise: self.pairwise,
        }
    }
}

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Grid spin glass: `θ(s) = Σ_i h_i s_i + Σ_(i,j) J_ij s_i s_j` with
/// `s ∈ {-1, +1}`, fields `h_i ~ U[-f, f]` and couplings `J_ij ~ U[0, c]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinGlassConfig {
    pub rows: usize,
    pub cols: usize,
    /// `f` in `h_i ~ U[-f, f]`.
    pub field_range: f64,
    /// `c` in `J_ij ~ U[0, c]` (or `U[c, 0]` when negative).
    pub coupling_max: f64,
    pub seed: u64,
}

impl SpinGlassConfig {
    pub fn new(rows: usize, cols: usize, coupling_max: f64, seed: u64) -> Self {
        SpinGlassConfig {
            rows,
            cols,
            field_range: 1.0,
            coupling_max,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidInput(
                "grid dimensions must be at least 1".into(),
            ));
        }
        if !(self.field_range >= 0.0 && self.field_range.is_finite()) {
            return Err(Error::InvalidInput(
                "field range must be finite and non-negative".into(),
            ));
        }
        if !self.coupling_max.is_finite() {
            return Err(Error::InvalidInput("coupling bound must be finite".into()));
        }
        Ok(())
    }
}

/// Grid edges in row-major order: for each vertex, right neighbour then
/// down neighbour.
pub fn grid_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    edges
}

/// Label index of spin `s`: index 0 is spin -1, index 1 is spin +1.
pub fn spin_of(label: usize) -> f64 {
    if label == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Draws a grid spin glass. Fields are drawn first in vertex order, then
/// couplings in [`grid_edges`] order, all from `SeedPath::new(cfg.seed)`.
pub fn generate_spin_glass(cfg: &SpinGlassConfig) -> Result<PairwiseModel> {
    cfg.validate()?;
    let mut rng = SeedPath::new(cfg.seed).rng();
    let n = cfg.rows * cfg.cols;
    let field = Uniform::new_inclusive(-cfg.field_range, cfg.field_range);
    let (lo, hi) = if cfg.coupling_max >= 0.0 {
        (0.0, cfg.coupling_max)
    } else {
        (cfg.coupling_max, 0.0)
    };
    let coupling = Uniform::new_inclusive(lo, hi);
    let fields: Vec<f64> = (0..n).map(|_| field.sample(&mut rng)).collect();
    let edges = grid_edges(cfg.rows, cfg.cols);
    let couplings: Vec<f64> = edges.iter().map(|_| coupling.sample(&mut rng)).collect();
    Ok(spin_glass_from_parameters(&fields, &edges, &couplings))
}

/// Encodes explicit spin-glass parameters as tables: unary `(-h, +h)` and
/// pairwise `(+J, -J; -J, +J)`.
pub fn spin_glass_from_parameters(
    fields: &[f64],
    edges: &[(usize, usize)],
    couplings: &[f64],
) -> PairwiseModel {
    let mut builder = ModelBuilder::new();
    for &h in fields {
        builder.add_vertex(&[-h, h]);
    }
    for (&(i, j), &w) in edges.iter().zip(couplings) {
        builder.add_edge(i, j, &[w, -w, -w, w]);
    }
    builder.finish_unchecked()
}
