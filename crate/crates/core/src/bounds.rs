//! Bounds on `log Z` from perturbed MAP values.
//!
//! * [`upper_bound`]: `E_γ[max_x θ(x) + Σ_i γ_i(x_i)] ≥ log Z`.
//! * [`lower_bound_expected`]: `E_γ[max_x θ(x) + (1/|A|) Σ_α γ_α(x_α)] ≤ log Z`
//!   for any collection `A` of vertex subsets.
//! * [`lower_bound_probable`]: a single MAP value of the model expanded with
//!   `m_i` copies per vertex; below `log Z` up to a slack that shrinks with
//!   the copy counts, with high probability.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExactOracle, Indexer};
use crate::map::{solve_map, Strategy};
use crate::model::{generate_spin_glass, ModelBuilder, PairwiseModel, SpinGlassConfig};
use crate::perturbation::{perturb_unary, sample_gumbel, GUMBEL_VARIANCE};
use crate::samplers::EXPANSION_CAP;
use crate::seed::{replicate, SeedPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Upper,
    LowerExpected,
    LowerProbable,
    Exact,
    Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimate {
    pub value: f64,
    pub kind: BoundKind,
    pub samples: usize,
    /// Empirical standard error of the mean, for Monte Carlo kinds.
    pub std_error: Option<f64>,
    /// `π/√(6M)`, exact for full perturbation only.
    pub analytic_std_error: Option<f64>,
    /// Slack subtracted from the probable lower bound (always zero here; the
    /// confidence is reported by [`probable_bound_confidence`]).
    pub epsilon_slack: Option<f64>,
    pub seed: Option<SeedPath>,
}

impl BoundEstimate {
    pub fn exact(value: f64) -> Self {
        BoundEstimate {
            value,
            kind: BoundKind::Exact,
            samples: 0,
            std_error: None,
            analytic_std_error: None,
            epsilon_slack: None,
            seed: None,
        }
    }

    fn monte_carlo(values: &[f64], kind: BoundKind, seed: &SeedPath) -> Self {
        let (mean, se) = mean_std_error(values);
        BoundEstimate {
            value: mean,
            kind,
            samples: values.len(),
            std_error: Some(se),
            analytic_std_error: None,
            epsilon_slack: None,
            seed: Some(seed.clone()),
        }
    }
}

/// Mean and standard error of the mean, summed in slice order with Neumaier
/// compensation. The standard error of a single value is zero.
pub fn mean_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, (ss / (n - 1.0) / n).sqrt())
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_samples(m: usize) -> Result<()> {
    if m < 1 {
        return Err(Error::InvalidInput(
            "sample count must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Mean over `m` draws of the unary-perturbed MAP value; replicate `k` on
/// `seed.child(k)`.
pub fn upper_bound(
    model: &PairwiseModel,
    m: usize,
    strategy: Strategy,
    seed: &SeedPath,
) -> Result<BoundEstimate> {
    check_samples(m)?;
    let values = replicate(seed, m, |_, rng| {
        Ok::<_, Error>(solve_map(&perturb_unary(model, rng), strategy)?.value)
    })?;
    Ok(BoundEstimate::monte_carlo(&values, BoundKind::Upper, seed))
}

/// `{{0}, {1}, …, {n-1}}`.
pub fn singleton_subsets(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| vec![i]).collect()
}

/// Mean over `m` draws of `max_x θ(x) + (1/|A|) Σ_α γ_α(x_α)`.
///
/// When every subset has at most two vertices the noise is folded into unary
/// and pairwise tables (adding zero edges where needed) and the perturbed
/// model is handed to the MAP solver. Larger subsets are handled by
/// enumerating all configurations, subject to the oracle state cap. Noise is
/// drawn subset by subset, each table in row-major order over the subset's
/// vertices as listed.
pub fn lower_bound_expected(
    model: &PairwiseModel,
    subsets: &[Vec<usize>],
    m: usize,
    strategy: Strategy,
    seed: &SeedPath,
) -> Result<BoundEstimate> {
    check_samples(m)?;
    if subsets.is_empty() {
        return Err(Error::InvalidInput(
            "at least one subset is required".into(),
        ));
    }
    let n = model.num_vertices();
    for s in subsets {
        let mut sorted = s.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if s.is_empty() || sorted.len() != s.len() || sorted.iter().any(|&v| v >= n) {
            return Err(Error::InvalidInput(format!("invalid subset {s:?}")));
        }
    }
    let weight = 1.0 / subsets.len() as f64;
    let values = if subsets.iter().all(|s| s.len() <= 2) {
        let (base, slots) = with_subset_edges(model, subsets);
        replicate(seed, m, |_, rng| {
            let mut p = base.clone();
            for slot in &slots {
                let table = match *slot {
                    Slot::Unary(v) => p.unary_mut(v),
                    Slot::Pair(e) => p.pair_table_mut(e),
                };
                for t in table {
                    *t += weight * sample_gumbel(rng);
                }
            }
            Ok::<_, Error>(solve_map(&p, strategy)?.value)
        })?
    } else {
        let oracle = ExactOracle::default();
        let energies = oracle.energies(model)?;
        let idx = Indexer::new(model.domain_sizes());
        let shapes: Vec<Vec<usize>> = subsets
            .iter()
            .map(|s| s.iter().map(|&v| model.domain_size(v)).collect())
            .collect();
        replicate(seed, m, |_, rng| {
            let noise: Vec<Vec<f64>> = shapes
                .iter()
                .map(|sh| {
                    (0..sh.iter().product::<usize>())
                        .map(|_| weight * sample_gumbel(rng))
                        .collect()
                })
                .collect();
            let mut best = f64::NEG_INFINITY;
            for (k, &e) in energies.iter().enumerate() {
                let mut v = e;
                for (s, table) in subsets.iter().zip(&noise) {
                    let mut flat = 0;
                    for &u in s {
                        flat = flat * model.domain_size(u) + idx.label(k, u);
                    }
                    v += table[flat];
                }
                if v > best {
                    best = v;
                }
            }
            if best == f64::NEG_INFINITY {
                return Err(Error::Infeasible);
            }
            Ok(best)
        })?
    };
    Ok(BoundEstimate::monte_carlo(
        &values,
        BoundKind::LowerExpected,
        seed,
    ))
}

enum Slot {
    Unary(usize),
    Pair(usize),
}

/// The model plus a zero edge for every pair subset that is not already an
/// edge, and the table that receives each subset's noise.
fn with_subset_edges(model: &PairwiseModel, subsets: &[Vec<usize>]) -> (PairwiseModel, Vec<Slot>) {
    let mut b = ModelBuilder::new();
    for v in 0..model.num_vertices() {
        b.add_vertex(model.unary(v));
    }
    for (e, &(i, j)) in model.edges().iter().enumerate() {
        b.add_edge(i, j, model.pair_table(e));
    }
    let mut extra: Vec<(usize, usize)> = Vec::new();
    let mut slots = Vec::with_capacity(subsets.len());
    for s in subsets {
        if let [v] = s[..] {
            slots.push(Slot::Unary(v));
            continue;
        }
        let (i, j) = (s[0], s[1]);
        let e = match model.find_edge(i, j) {
            Some(e) => e,
            None => match extra
                .iter()
                .position(|&(a, c)| (a, c) == (i, j) || (a, c) == (j, i))
            {
                Some(k) => model.num_edges() + k,
                None => {
                    extra.push((i, j));
                    b.add_edge(
                        i,
                        j,
                        &vec![0.0; model.domain_size(i) * model.domain_size(j)],
                    )
                }
            },
        };
        slots.push(Slot::Pair(e));
    }
    (b.finish_unchecked(), slots)
}

/// Model with `replicas[i]` copies of vertex `i`, copy ids vertex-major.
/// Copies of `i` carry `θ_i / m_i`; every copy pair across an edge `(i, j)`
/// carries `θ_ij / (m_i m_j)`, so replica-constant energies equal the original.
pub fn expand_replicas(
    model: &PairwiseModel,
    replicas: &[usize],
) -> Result<(PairwiseModel, Vec<usize>)> {
    let n = model.num_vertices();
    if replicas.len() != n || replicas.iter().any(|&r| r == 0) {
        return Err(Error::InvalidInput(
            "one positive replica count per vertex is required".into(),
        ));
    }
    let entries: u128 = (0..n)
        .map(|i| (replicas[i] * model.domain_size(i)) as u128)
        .sum::<u128>()
        + model
            .edges()
            .iter()
            .map(|&(i, j)| {
                (replicas[i] * replicas[j] * model.domain_size(i) * model.domain_size(j)) as u128
            })
            .sum::<u128>();
    if entries > EXPANSION_CAP as u128 {
        return Err(Error::ExpansionTooLarge {
            size: entries,
            cap: EXPANSION_CAP,
        });
    }
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut b = ModelBuilder::new();
    for (i, &m) in replicas.iter().enumerate() {
        let table: Vec<f64> = model.unary(i).iter().map(|v| v / m as f64).collect();
        for _ in 0..m {
            b.add_vertex(&table);
        }
        offsets.push(offsets[i] + m);
    }
    for (e, &(i, j)) in model.edges().iter().enumerate() {
        let w = (replicas[i] * replicas[j]) as f64;
        let table: Vec<f64> = model.pair_table(e).iter().map(|v| v / w).collect();
        for a in offsets[i]..offsets[i + 1] {
            for c in offsets[j]..offsets[j + 1] {
                b.add_edge(a, c, &table);
            }
        }
    }
    Ok((b.finish_unchecked(), offsets))
}

/// One MAP value of the replica-expanded model with unary noise `γ/m_i` on
/// every copy entry. With all `m_i = 1` this is one unary-perturbed MAP value
/// on the same draws as [`perturb_unary`].
pub fn lower_bound_probable<R: Rng + ?Sized>(
    model: &PairwiseModel,
    replicas: &[usize],
    strategy: Strategy,
    rng: &mut R,
) -> Result<BoundEstimate> {
    let (expanded, offsets) = expand_replicas(model, replicas)?;
    let mut p = expanded;
    for i in 0..model.num_vertices() {
        let w = 1.0 / replicas[i] as f64;
        for c in offsets[i]..offsets[i + 1] {
            for t in p.unary_mut(c) {
                *t += w * sample_gumbel(rng);
            }
        }
    }
    let value = solve_map(&p, strategy)?.value;
    Ok(BoundEstimate {
        value,
        kind: BoundKind::LowerProbable,
        samples: 1,
        std_error: None,
        analytic_std_error: None,
        epsilon_slack: Some(0.0),
        seed: None,
    })
}

/// `1 - Σ_i π² |X_i| / (6 m_i ε²)`: the probability, by Chebyshev, that the
/// probable lower bound is within `ε n` of its target. May be negative
/// (vacuous) for small copy counts.
pub fn probable_bound_confidence(domain_sizes: &[usize], replicas: &[usize], epsilon: f64) -> f64 {
    1.0 - domain_sizes
        .iter()
        .zip(replicas)
        .map(|(&d, &m)| GUMBEL_VARIANCE * d as f64 / (m as f64 * epsilon * epsilon))
        .sum::<f64>()
}

/// Which bounds a report computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSelection {
    Upper,
    LowerExpected,
    LowerProbable,
    All,
}

impl BoundSelection {
    fn upper(self) -> bool {
        matches!(self, BoundSelection::Upper | BoundSelection::All)
    }
    fn lower_expected(self) -> bool {
        matches!(self, BoundSelection::LowerExpected | BoundSelection::All)
    }
    fn lower_probable(self) -> bool {
        matches!(self, BoundSelection::LowerProbable | BoundSelection::All)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub rows: usize,
    pub cols: usize,
    pub field_range: f64,
    pub coupling_grid: Vec<f64>,
    /// Spin-glass model seeds; the same seed gives the same fields at every `c`.
    pub seeds: Vec<u64>,
    pub mc_samples: usize,
    /// Copies per vertex for the probable lower bound.
    pub replicas: usize,
    pub bound: BoundSelection,
    pub strategy: Strategy,
    /// Root of all noise streams.
    pub noise_seed: u64,
}

impl BoundsConfig {
    pub fn new(rows: usize, cols: usize, coupling_grid: Vec<f64>, seeds: Vec<u64>) -> Self {
        BoundsConfig {
            rows,
            cols,
            field_range: 1.0,
            coupling_grid,
            seeds,
            mc_samples: 1000,
            replicas: 10,
            bound: BoundSelection::All,
            strategy: Strategy::Auto,
            noise_seed: 0,
        }
    }
}

/// One CSV row of a bounds report. Missing bounds serialize as empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub c: f64,
    pub seed: u64,
    pub exact_logz: f64,
    pub upper: Option<f64>,
    pub upper_se: Option<f64>,
    pub lower_exp: Option<f64>,
    pub lower_exp_se: Option<f64>,
    pub lower_prob: Option<f64>,
    /// `exp(min(0, lower - upper))` with the probable lower bound when present,
    /// else the expected one: a proxy for the rejection sampler's acceptance
    /// rate `Z / exp(U_0)`.
    pub accept_proxy: Option<f64>,
}

pub const BOUNDS_CSV_HEADER: &str =
    "c,seed,exact_logz,upper,upper_se,lower_exp,lower_exp_se,lower_prob,accept_proxy";

/// Bounds for one model. Noise for `upper`, `lower_exp` and `lower_prob`
/// comes from `noise.child(0)`, `.child(1)` and `.child(2)`.
pub fn bounds_for_model(
    model: &PairwiseModel,
    cfg: &BoundsConfig,
    c: f64,
    seed: u64,
    noise: &SeedPath,
) -> Result<BoundsRow> {
    let exact_logz = ExactOracle::default().log_partition(model)?;
    let mut row = BoundsRow {
        c,
        seed,
        exact_logz,
        upper: None,
        upper_se: None,
        lower_exp: None,
        lower_exp_se: None,
        lower_prob: None,
        accept_proxy: None,
    };
    if cfg.bound.upper() {
        let u = upper_bound(model, cfg.mc_samples, cfg.strategy, &noise.child(0))?;
        row.upper = Some(u.value);
        row.upper_se = u.std_error;
    }
    if cfg.bound.lower_expected() {
        let subsets = singleton_subsets(model.num_vertices());
        let l = lower_bound_expected(
            model,
            &subsets,
            cfg.mc_samples,
            cfg.strategy,
            &noise.child(1),
        )?;
        row.lower_exp = Some(l.value);
        row.lower_exp_se = l.std_error;
    }
    if cfg.bound.lower_probable() {
        let replicas = vec![cfg.replicas; model.num_vertices()];
        let l = lower_bound_probable(model, &replicas, cfg.strategy, &mut noise.child(2).rng())?;
        row.lower_prob = Some(l.value);
    }
    if let (Some(u), Some(l)) = (row.upper, row.lower_prob.or(row.lower_exp)) {
        row.accept_proxy = Some((l - u).min(0.0).exp());
    }
    Ok(row)
}

/// One row per `(c, seed)`, couplings outermost. Model `(c, s)` is the
/// spin glass with seed `s` and coupling bound `c`; its noise root is
/// `noise_seed / c_index / seed_index`.
pub fn bounds_report(cfg: &BoundsConfig) -> Result<Vec<BoundsRow>> {
    if cfg.coupling_grid.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::InvalidInput(
            "coupling grid and seed list must be non-empty".into(),
        ));
    }
    let root = SeedPath::new(cfg.noise_seed);
    let mut rows = Vec::with_capacity(cfg.coupling_grid.len() * cfg.seeds.len());
    for (ci, &c) in cfg.coupling_grid.iter().enumerate() {
        for (si, &s) in cfg.seeds.iter().enumerate() {
            let sg = SpinGlassConfig {
                rows: cfg.rows,
                cols: cfg.cols,
                field_range: cfg.field_range,
                coupling_max: c,
                seed: s,
            };
            let model = generate_spin_glass(&sg)?;
            rows.push(bounds_for_model(
                &model,
                cfg,
                c,
                s,
                &root.descend(&[ci as u64, si as u64]),
            )?);
        }
    }
    Ok(rows)
}

/// Writes rows under [`BOUNDS_CSV_HEADER`].
pub fn write_bounds_csv<W: std::io::Write>(rows: &[BoundsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::log_partition;
    use crate::model::Assignment;
    use crate::samplers::estimate_logz_full;

    #[test]
    fn mean_and_error() {
        let (m, se) = mean_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std_error(&[7.0]), (7.0, 0.0));
        let (m, _) = mean_std_error(&[1e16, 1.0, -1e16]);
        assert!((m - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_vertex_upper_matches_full() {
        let m = PairwiseModel::independent(vec![vec![0.3, -0.2]]).unwrap();
        let u = upper_bound(&m, 10_000, Strategy::Auto, &SeedPath::new(1)).unwrap();
        let f = estimate_logz_full(&m, 10_000, &SeedPath::new(1)).unwrap();
        let z = log_partition(&m).unwrap();
        assert!((u.value - z).abs() < 3.0 * u.std_error.unwrap());
        assert!((f.value - z).abs() < 3.0 * f.std_error.unwrap());
        assert_eq!(u.kind, BoundKind::Upper);
    }

    #[test]
    fn zero_coupling_upper_is_tight() {
        let m = generate_spin_glass(&SpinGlassConfig::new(2, 3, 0.0, 4)).unwrap();
        let u = upper_bound(&m, 10_000, Strategy::Auto, &SeedPath::new(2)).unwrap();
        assert!((u.value - log_partition(&m).unwrap()).abs() < 3.0 * u.std_error.unwrap());
    }

    #[test]
    fn whole_model_subset_is_full_perturbation() {
        let m = generate_spin_glass(&SpinGlassConfig::new(2, 2, 1.0, 4)).unwrap();
        let l = lower_bound_expected(
            &m,
            &[vec![0, 1, 2, 3]],
            10_000,
            Strategy::Auto,
            &SeedPath::new(3),
        )
        .unwrap();
        assert!((l.value - log_partition(&m).unwrap()).abs() < 3.0 * l.std_error.unwrap());
        let single = PairwiseModel::independent(vec![vec![0.0, 1.0, -1.0]]).unwrap();
        let l = lower_bound_expected(
            &single,
            &[vec![0]],
            10_000,
            Strategy::Auto,
            &SeedPath::new(3),
        )
        .unwrap();
        assert!((l.value - log_partition(&single).unwrap()).abs() < 3.0 * l.std_error.unwrap());
    }

    #[test]
    fn pair_subsets_agree_with_enumeration_path() {
        // The pair path and the enumeration path consume noise in the same
        // order, so with a non-edge pair and a triple they must differ only
        // through the solver, not the draws.
        let m = generate_spin_glass(&SpinGlassConfig::new(1, 3, 1.0, 5)).unwrap();
        let subsets = vec![vec![0, 2], vec![1]];
        let a = lower_bound_expected(&m, &subsets, 200, Strategy::Exhaustive, &SeedPath::new(9))
            .unwrap();
        let oracle = ExactOracle::default();
        let e = oracle.energies(&m).unwrap();
        let idx = Indexer::new(m.domain_sizes());
        let values: Vec<f64> = (0..200)
            .map(|k| {
                let mut rng = SeedPath::new(9).child(k).rng();
                let g02: Vec<f64> = (0..4).map(|_| 0.5 * sample_gumbel(&mut rng)).collect();
                let g1: Vec<f64> = (0..2).map(|_| 0.5 * sample_gumbel(&mut rng)).collect();
                (0..8)
                    .map(|s| {
                        e[s] + g02[idx.label(s, 0) * 2 + idx.label(s, 2)] + g1[idx.label(s, 1)]
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let (mean, _) = mean_std_error(&values);
        assert!((a.value - mean).abs() < 1e-12);
    }

    #[test]
    fn invalid_subsets() {
        let m = PairwiseModel::uniform(vec![2, 2], vec![]).unwrap();
        for s in [vec![], vec![vec![]], vec![vec![0, 0]], vec![vec![2]]] {
            assert!(lower_bound_expected(&m, &s, 10, Strategy::Auto, &SeedPath::new(0)).is_err());
        }
    }

    #[test]
    fn expected_lower_below_logz() {
        let m = generate_spin_glass(&SpinGlassConfig::new(3, 3, 3.0, 6)).unwrap();
        let l = lower_bound_expected(
            &m,
            &singleton_subsets(9),
            10_000,
            Strategy::Auto,
            &SeedPath::new(4),
        )
        .unwrap();
        assert!(l.value <= log_partition(&m).unwrap() + 3.0 * l.std_error.unwrap());
    }

    #[test]
    fn one_replica_is_unary_perturbation() {
        let m = generate_spin_glass(&SpinGlassConfig::new(2, 3, 2.0, 7)).unwrap();
        let l =
            lower_bound_probable(&m, &[1; 6], Strategy::Auto, &mut SeedPath::new(5).rng()).unwrap();
        let p = perturb_unary(&m, &mut SeedPath::new(5).rng());
        assert_eq!(l.value, solve_map(&p, Strategy::Exhaustive).unwrap().value);
        assert_eq!(l.epsilon_slack, Some(0.0));
    }

    #[test]
    fn replica_expansion_shape_and_energy() {
        let m = generate_spin_glass(&SpinGlassConfig::new(2, 2, 2.0, 7)).unwrap();
        let reps = [2, 3, 1, 2];
        let (ex, offsets) = expand_replicas(&m, &reps).unwrap();
        assert_eq!(ex.num_vertices(), 8);
        assert_eq!(offsets, vec![0, 2, 5, 6, 8]);
        let edges: usize = m.edges().iter().map(|&(i, j)| reps[i] * reps[j]).sum();
        assert_eq!(ex.num_edges(), edges);
        assert!(ex.is_attractive());
        for k in 0..16 {
            let x = Indexer::new(m.domain_sizes()).assignment(k);
            let y: Vec<usize> = (0..4)
                .flat_map(|i| std::iter::repeat(x[i]).take(reps[i]))
                .collect();
            assert!((ex.energy(&Assignment(y)).unwrap() - m.energy(&x).unwrap()).abs() < 1e-12);
        }
        assert!(expand_replicas(&m, &[1, 1, 1]).is_err());
        assert!(matches!(
            expand_replicas(&m, &[4000; 4]),
            Err(Error::ExpansionTooLarge { .. })
        ));
    }

    #[test]
    fn confidence_expression() {
        let c = probable_bound_confidence(&[2, 2], &[100, 100], 1.0);
        assert!((c - (1.0 - 4.0 * GUMBEL_VARIANCE / 100.0)).abs() < 1e-15);
    }

    #[test]
    fn report_rows_and_csv_header() {
        let mut cfg = BoundsConfig::new(2, 2, vec![0.0, 1.0], vec![1, 2]);
        cfg.mc_samples = 200;
        cfg.replicas = 3;
        let rows = bounds_report(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[1].c, rows[1].seed), (0.0, 2));
        for r in &rows {
            let p = r.accept_proxy.unwrap();
            assert!(p > 0.0 && p <= 1.0);
        }
        let mut buf = Vec::new();
        write_bounds_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), BOUNDS_CSV_HEADER);
        assert_eq!(text.lines().count(), 5);
        assert_eq!(bounds_report(&cfg).unwrap(), rows);
    }

    #[test]
    fn partial_selection_leaves_fields_empty() {
        let mut cfg = BoundsConfig::new(1, 2, vec![1.0], vec![3]);
        cfg.mc_samples = 50;
        cfg.bound = BoundSelection::Upper;
        let rows = bounds_report(&cfg).unwrap();
        assert!(
            rows[0].upper.is_some()
                && rows[0].lower_exp.is_none()
                && rows[0].accept_proxy.is_none()
        );
        let mut buf = Vec::new();
        write_bounds_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .lines()
            .nth(1)
            .unwrap()
            .ends_with(",,,,"));
    }
}
