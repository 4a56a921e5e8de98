//! Spin-glass experiment harness.
//!
//! Each run writes a CSV and a JSON sidecar holding the full spec, from which
//! the CSV can be regenerated byte for byte. Noise for cell
//! `(grid g, coupling c, model seed s)` comes from `seed / g / c / s`.
//!
//! | experiment       | one row per                | columns                                   |
//! |------------------|----------------------------|-------------------------------------------|
//! | `lower-bounds`   | grid, coupling, model seed | `grid` + the bounds report columns        |
//! | `marginal-error` | grid, coupling, method     | mean and std of vertex-marginal TV        |
//! | `acceptance`     | grid, coupling, model seed | empirical acceptance, oracle rate, proxy  |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{gibbs_chain, ChainConfig};
use crate::bounds::{
    bounds_for_model, lower_bound_expected, mean_std_error, singleton_subsets, BoundSelection,
    BoundsConfig, BoundsRow,
};
use crate::error::{Error, Result};
use crate::exact::{empirical_vertex_marginals, mean_vertex_tv, ExactOracle};
use crate::map::Strategy;
use crate::model::{generate_spin_glass, PairwiseModel, SpinGlassConfig};
use crate::perturbation::PerturbScheme;
use crate::samplers::{acceptance_rate, approx_map_batch, make_bound_family, FamilyKind};
use crate::seed::SeedPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    LowerBounds,
    MarginalError,
    Acceptance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    /// `(rows, cols)` of each spin-glass grid.
    pub grid_sizes: Vec<(usize, usize)>,
    pub coupling_grid: Vec<f64>,
    /// Spin-glass model seeds.
    pub seeds: Vec<u64>,
    pub field_range: f64,
    /// Monte Carlo samples per bound or per upper-bound family member.
    pub mc_samples: usize,
    /// Copies per vertex for the probable lower bound.
    pub replicas: usize,
    /// Perturb-and-MAP draws per model (marginal error).
    pub draws: usize,
    /// Gibbs sweeps per model (marginal error).
    pub sweeps: usize,
    /// Single attempts per model (acceptance).
    pub trials: usize,
    pub strategy: Strategy,
    /// Root of all noise streams.
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentSpec {
            experiment,
            grid_sizes: vec![(3, 3)],
            coupling_grid: vec![0.5, 1.0, 2.0, 3.0],
            seeds: (0..10).collect(),
            field_range: 1.0,
            mc_samples: 1000,
            replicas: 10,
            draws: 2000,
            sweeps: 2000,
            trials: 200,
            strategy: Strategy::Auto,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.into()));
        if self.grid_sizes.is_empty() || self.coupling_grid.is_empty() || self.seeds.is_empty() {
            return bad("grid sizes, coupling grid and seeds must be non-empty");
        }
        if self.mc_samples == 0 || self.replicas == 0 || self.draws == 0 || self.trials == 0 {
            return bad("sample, replica, draw and trial counts must be positive");
        }
        if self.experiment == ExperimentKind::MarginalError && self.sweeps < 2 {
            return bad("sweeps must be at least 2");
        }
        for &(rows, cols) in &self.grid_sizes {
            for &c in &self.coupling_grid {
                SpinGlassConfig {
                    rows,
                    cols,
                    field_range: self.field_range,
                    coupling_max: c,
                    seed: 0,
                }
                .validate()?;
            }
            ExactOracle::default()
                .states(&PairwiseModel::uniform(vec![2; rows * cols], vec![])?)?;
        }
        Ok(())
    }

    fn model(&self, grid: (usize, usize), c: f64, seed: u64) -> Result<PairwiseModel> {
        generate_spin_glass(&SpinGlassConfig {
            rows: grid.0,
            cols: grid.1,
            field_range: self.field_range,
            coupling_max: c,
            seed,
        })
    }

    fn cells(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for g in 0..self.grid_sizes.len() {
            for c in 0..self.coupling_grid.len() {
                for s in 0..self.seeds.len() {
                    out.push((g, c, s));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundsRow {
    pub grid: String,
    pub c: f64,
    pub seed: u64,
    pub exact_logz: f64,
    pub upper: Option<f64>,
    pub upper_se: Option<f64>,
    pub lower_exp: Option<f64>,
    pub lower_exp_se: Option<f64>,
    pub lower_prob: Option<f64>,
    pub accept_proxy: Option<f64>,
}

impl LowerBoundsRow {
    fn new(grid: String, b: BoundsRow) -> Self {
        LowerBoundsRow {
            grid,
            c: b.c,
            seed: b.seed,
            exact_logz: b.exact_logz,
            upper: b.upper,
            upper_se: b.upper_se,
            lower_exp: b.lower_exp,
            lower_exp_se: b.lower_exp_se,
            lower_prob: b.lower_prob,
            accept_proxy: b.accept_proxy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalErrorRow {
    pub grid: String,
    pub c: f64,
    pub method: String,
    pub mean_tv: f64,
    pub std_tv: f64,
    pub models: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRow {
    pub grid: String,
    pub c: f64,
    pub seed: u64,
    pub trials: usize,
    pub accepted: usize,
    pub rate: f64,
    pub rate_se: f64,
    pub exact_logz: f64,
    pub log_upper: f64,
    /// `Z / exp(U_0)`, the acceptance probability of the realized family.
    pub oracle_rate: f64,
    /// `exp(min(0, lower_exp - U_0))`.
    pub proxy: f64,
}

/// Rows of any experiment, in deterministic cell order.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentRows {
    LowerBounds(Vec<LowerBoundsRow>),
    MarginalError(Vec<MarginalErrorRow>),
    Acceptance(Vec<AcceptanceRow>),
}

fn grid_name(g: (usize, usize)) -> String {
    format!("{}x{}", g.0, g.1)
}

/// Runs the experiment in memory.
pub fn experiment_rows(spec: &ExperimentSpec) -> Result<ExperimentRows> {
    spec.validate()?;
    let root = SeedPath::new(spec.seed);
    let noise = |g: usize, c: usize, s: usize| root.descend(&[g as u64, c as u64, s as u64]);
    match spec.experiment {
        ExperimentKind::LowerBounds => {
            let mut rows = Vec::new();
            for (g, ci, si) in spec.cells() {
                let (grid, c, s) = (spec.grid_sizes[g], spec.coupling_grid[ci], spec.seeds[si]);
                let cfg = BoundsConfig {
                    rows: grid.0,
                    cols: grid.1,
                    field_range: spec.field_range,
                    coupling_grid: vec![c],
                    seeds: vec![s],
                    mc_samples: spec.mc_samples,
                    replicas: spec.replicas,
                    bound: BoundSelection::All,
                    strategy: spec.strategy,
                    noise_seed: spec.seed,
                };
                let model = spec.model(grid, c, s)?;
                let bounds = bounds_for_model(&model, &cfg, c, s, &noise(g, ci, si))?;
                rows.push(LowerBoundsRow::new(grid_name(grid), bounds));
            }
            Ok(ExperimentRows::LowerBounds(rows))
        }
        ExperimentKind::MarginalError => {
            let methods = ["approx-unary", "approx-pairwise", "gibbs-chain"];
            let mut rows = Vec::new();
            for g in 0..spec.grid_sizes.len() {
                for ci in 0..spec.coupling_grid.len() {
                    let mut errors = vec![Vec::new(); methods.len()];
                    for si in 0..spec.seeds.len() {
                        let (grid, c) = (spec.grid_sizes[g], spec.coupling_grid[ci]);
                        let model = spec.model(grid, c, spec.seeds[si])?;
                        let exact = ExactOracle::default().vertex_marginals(&model)?;
                        let cell = noise(g, ci, si);
                        for (k, errs) in errors.iter_mut().enumerate() {
                            let samples = match k {
                                0 => {
                                    approx_map_batch(
                                        &model,
                                        PerturbScheme::Unary,
                                        spec.strategy,
                                        spec.draws,
                                        &cell.child(0),
                                    )?
                                    .samples
                                }
                                // Pairwise noise breaks attractiveness; these
                                // models are small enough to solve exhaustively.
                                1 => {
                                    approx_map_batch(
                                        &model,
                                        PerturbScheme::Pairwise,
                                        Strategy::Auto,
                                        spec.draws,
                                        &cell.child(1),
                                    )?
                                    .samples
                                }
                                _ => {
                                    gibbs_chain(
                                        &model,
                                        &ChainConfig::new(spec.sweeps),
                                        &mut cell.child(2).rng(),
                                    )?
                                    .samples
                                }
                            };
                            errs.push(mean_vertex_tv(
                                &exact,
                                &empirical_vertex_marginals(model.domain_sizes(), &samples),
                            ));
                        }
                    }
                    for (k, errs) in errors.iter().enumerate() {
                        let (mean, se) = mean_std_error(errs);
                        rows.push(MarginalErrorRow {
                            grid: grid_name(spec.grid_sizes[g]),
                            c: spec.coupling_grid[ci],
                            method: methods[k].to_string(),
                            mean_tv: mean,
                            std_tv: se * (errs.len() as f64).sqrt(),
                            models: errs.len(),
                        });
                    }
                }
            }
            Ok(ExperimentRows::MarginalError(rows))
        }
        ExperimentKind::Acceptance => {
            let mut rows = Vec::new();
            for (g, ci, si) in spec.cells() {
                let (grid, c, s) = (spec.grid_sizes[g], spec.coupling_grid[ci], spec.seeds[si]);
                let model = spec.model(grid, c, s)?;
                let cell = noise(g, ci, si);
                let exact_logz = ExactOracle::default().log_partition(&model)?;
                let family = make_bound_family(
                    &model,
                    None,
                    FamilyKind::GumbelMc {
                        samples: spec.mc_samples,
                    },
                    spec.strategy,
                    &cell.child(0),
                )?;
                let log_upper = family.log_upper_bound()?.value;
                let est = acceptance_rate(&family, spec.trials, &mut cell.child(1).rng())?;
                let lower = lower_bound_expected(
                    &model,
                    &singleton_subsets(model.num_vertices()),
                    spec.mc_samples,
                    spec.strategy,
                    &cell.child(2),
                )?;
                rows.push(AcceptanceRow {
                    grid: grid_name(grid),
                    c,
                    seed: s,
                    trials: est.trials,
                    accepted: est.accepted,
                    rate: est.rate,
                    rate_se: est.std_error,
                    exact_logz,
                    log_upper,
                    oracle_rate: (exact_logz - log_upper).min(0.0).exp(),
                    proxy: (lower.value - log_upper).min(0.0).exp(),
                });
            }
            Ok(ExperimentRows::Acceptance(rows))
        }
    }
}

fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rows` as CSV.
pub fn write_experiment_csv<W: Write>(rows: &ExperimentRows, out: W) -> Result<()> {
    match rows {
        ExperimentRows::LowerBounds(r) => write_rows(r, out),
        ExperimentRows::MarginalError(r) => write_rows(r, out),
        ExperimentRows::Acceptance(r) => write_rows(r, out),
    }
}

/// Paths written by [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub rows: ExperimentRows,
}

/// The sidecar path for a CSV path: same stem, `.json` extension.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    version: String,
    spec: ExperimentSpec,
}

/// Runs the experiment and writes the CSV to `out` and the spec next to it.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path) -> Result<ExperimentOutput> {
    let rows = experiment_rows(spec)?;
    write_experiment_csv(&rows, BufWriter::new(File::create(out)?))?;
    let sidecar = sidecar_path(out);
    let meta = Sidecar {
        version: env!("CARGO_PKG_VERSION").to_string(),
        spec: spec.clone(),
    };
    let mut f = BufWriter::new(File::create(&sidecar)?);
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(ExperimentOutput {
        csv: out.to_path_buf(),
        sidecar,
        rows,
    })
}

/// Reads the spec back from a sidecar.
pub fn read_sidecar(path: &Path) -> Result<ExperimentSpec> {
    let meta: Sidecar = serde_json::from_reader(File::open(path)?)?;
    Ok(meta.spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentSpec {
        ExperimentSpec {
            grid_sizes: vec![(2, 2)],
            coupling_grid: vec![0.0, 1.0],
            seeds: vec![1, 2],
            mc_samples: 100,
            replicas: 3,
            draws: 200,
            sweeps: 200,
            trials: 20,
            ..ExperimentSpec::new(kind)
        }
    }

    #[test]
    fn row_counts() {
        match experiment_rows(&small(ExperimentKind::LowerBounds)).unwrap() {
            ExperimentRows::LowerBounds(r) => assert_eq!(r.len(), 4),
            _ => unreachable!(),
        }
        match experiment_rows(&small(ExperimentKind::MarginalError)).unwrap() {
            ExperimentRows::MarginalError(r) => {
                assert_eq!(r.len(), 6);
                assert!(r.iter().all(|x| x.models == 2 && x.mean_tv >= 0.0));
            }
            _ => unreachable!(),
        }
        match experiment_rows(&small(ExperimentKind::Acceptance)).unwrap() {
            ExperimentRows::Acceptance(r) => {
                assert_eq!(r.len(), 4);
                assert!(r
                    .iter()
                    .all(|x| x.rate <= 1.0 && x.oracle_rate <= 1.0 && x.proxy > 0.0));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn files_are_reproducible_from_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let spec = small(ExperimentKind::LowerBounds);
        let out = run_experiment(&spec, &a).unwrap();
        let replay = read_sidecar(&out.sidecar).unwrap();
        assert_eq!(replay, spec);
        run_experiment(&replay, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let text = std::fs::read_to_string(&a).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "grid,c,seed,exact_logz,upper,upper_se,lower_exp,lower_exp_se,lower_prob,accept_proxy"
        );
    }

    #[test]
    fn invalid_specs() {
        let mut s = small(ExperimentKind::LowerBounds);
        s.seeds.clear();
        assert!(s.validate().is_err());
        let mut s = small(ExperimentKind::LowerBounds);
        s.grid_sizes = vec![(6, 5)];
        assert!(matches!(
            s.validate(),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }
}
