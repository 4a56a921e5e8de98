use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use perturbmap::baselines::{parallel_chains, ChainConfig, ChainInit, Scan};
use perturbmap::bounds::{bounds_report, write_bounds_csv, BoundSelection, BoundsConfig};
use perturbmap::exact::ExactOracle;
use perturbmap::experiment::{read_sidecar, run_experiment, ExperimentKind, ExperimentSpec};
use perturbmap::map::{solve_map, Strategy};
use perturbmap::model::generate_spin_glass;
use perturbmap::perturbation::PerturbScheme;
use perturbmap::samplers::{
    approx_map_batch, expanded_map_batch, gumbel_max_batch, make_bound_family, unbiased_batch,
    FamilyKind, SampleBatch, SamplerKind,
};
use perturbmap::seed::SEED_ENV_VAR;
use perturbmap::{Error, PairwiseModel, Result, SeedPath, SpinGlassConfig};

#[derive(Parser)]
#[command(
    name = "perturbmap",
    version,
    about = "Perturb-and-MAP sampling and log-partition bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a spin-glass model as JSON.
    GenModel(GenModel),
    /// Solve the MAP problem of a model.
    Map(MapArgs),
    /// Exact log-partition function (and optionally vertex marginals).
    Exact(ExactArgs),
    /// Draw samples with a perturb-and-MAP sampler.
    Sample(SampleArgs),
    /// Draw samples with an MCMC baseline.
    Baseline(BaselineArgs),
    /// Bounds on log Z over a spin-glass sweep, as CSV.
    Bounds(BoundsArgs),
    /// Run a spin-glass experiment, writing CSV plus a JSON sidecar.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SeedArg {
    /// Root random seed.
    #[arg(long, env = SEED_ENV_VAR)]
    seed: Option<u64>,
}

impl SeedArg {
    fn get(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidInput(format!("--seed or {SEED_ENV_VAR} is required")))
    }
}

#[derive(Args)]
struct GenModel {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Couplings are drawn from [0, c].
    #[arg(long)]
    coupling: f64,
    /// Fields are drawn from [-f, f].
    #[arg(long, default_value_t = 1.0)]
    field_range: f64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value_t = Strategy::Auto)]
    strategy: Strategy,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    model: PathBuf,
    /// Also report per-vertex marginals.
    #[arg(long)]
    marginals: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleMethod {
    GumbelFull,
    ApproxUnary,
    ApproxPairwise,
    Unbiased,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    ExactLse,
    GumbelMc,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    sampler: SampleMethod,
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    /// Replicas per child subtree for approximate samplers on forests;
    /// 1 disables expansion.
    #[arg(long, default_value_t = 1)]
    m_replicas: usize,
    /// Anchor edge `i,j` of the expansion (defaults to the first edge).
    #[arg(long, value_parser = parse_pair)]
    anchor: Option<(usize, usize)>,
    /// Monte Carlo samples per upper-bound evaluation (unbiased sampler).
    #[arg(long, default_value_t = 1000)]
    mc_samples: usize,
    #[arg(long, value_enum, default_value_t = Family::GumbelMc)]
    family: Family,
    #[arg(long, default_value_t = 100_000)]
    max_restarts: usize,
    #[arg(long, value_enum, default_value_t = Strategy::Auto)]
    strategy: Strategy,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChainMethod {
    Gibbs,
    Metropolis,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Random,
    Map,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    sampler: ChainMethod,
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    /// Defaults to sweeps / 10.
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, value_enum, default_value_t = Scan::Systematic)]
    scan: Scan,
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    init: InitArg,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 3)]
    rows: usize,
    #[arg(long, default_value_t = 3)]
    cols: usize,
    #[arg(long, default_value_t = 1.0)]
    field_range: f64,
    #[arg(long, value_enum, default_value_t = BoundSelection::All)]
    bound: BoundSelection,
    #[arg(long, default_value_t = 1000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 10)]
    replicas: usize,
    /// Comma-separated coupling bounds.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,3")]
    coupling_grid: Vec<f64>,
    /// Model seeds: `a..b` or a comma-separated list.
    #[arg(long, value_parser = parse_seeds, default_value = "0..10")]
    seeds: SeedList,
    #[arg(long, value_enum, default_value_t = Strategy::Auto)]
    strategy: Strategy,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum, required_unless_present = "spec")]
    kind: Option<ExperimentKind>,
    /// Replay a previous run from its JSON sidecar; other settings are ignored.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Grid sizes such as `3x3,4x4`.
    #[arg(long, value_delimiter = ',', value_parser = parse_grid, default_value = "3x3")]
    grid: Vec<(usize, usize)>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,3")]
    coupling_grid: Vec<f64>,
    #[arg(long, value_parser = parse_seeds, default_value = "0..10")]
    seeds: SeedList,
    #[arg(long, default_value_t = 1.0)]
    field_range: f64,
    #[arg(long, default_value_t = 1000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 10)]
    replicas: usize,
    #[arg(long, default_value_t = 2000)]
    draws: usize,
    #[arg(long, default_value_t = 2000)]
    sweeps: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = Strategy::Auto)]
    strategy: Strategy,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Debug)]
struct SeedList(Vec<u64>);

fn parse_seeds(s: &str) -> std::result::Result<SeedList, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
        return Ok(SeedList((a..b).collect()));
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|e| format!("{e}")))
        .collect::<std::result::Result<_, _>>()
        .map(SeedList)
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected i,j")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').ok_or("expected ROWSxCOLS")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn read_model(path: &Path) -> Result<PairwiseModel> {
    PairwiseModel::from_json(&fs::read_to_string(path)?)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_samples(
    batch: &SampleBatch,
    out: &Option<PathBuf>,
    extra: serde_json::Value,
) -> Result<()> {
    let mut w = output(out)?;
    let mut header = json!({
        "sampler": batch.sampler,
        "seed": batch.seed,
        "draws": batch.samples.len(),
        "restarts": batch.restarts,
        "heuristic": batch.heuristic,
    });
    if let (Some(h), Some(e)) = (header.as_object_mut(), extra.as_object()) {
        h.extend(e.clone());
    }
    writeln!(w, "{header}")?;
    for x in &batch.samples {
        writeln!(w, "{}", serde_json::to_string(x)?)?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenModel(a) => {
            let cfg = SpinGlassConfig {
                rows: a.rows,
                cols: a.cols,
                field_range: a.field_range,
                coupling_max: a.coupling,
                seed: a.seed.get()?,
            };
            let mut w = output(&a.out)?;
            writeln!(w, "{}", generate_spin_glass(&cfg)?.to_json())?;
            w.flush()?;
        }
        Command::Map(a) => {
            let r = solve_map(&read_model(&a.model)?, a.strategy)?;
            println!("{}", serde_json::to_string(&r)?);
        }
        Command::Exact(a) => {
            let model = read_model(&a.model)?;
            let oracle = ExactOracle::default();
            let mut v = json!({ "log_z": oracle.log_partition(&model)? });
            if a.marginals {
                v["marginals"] = json!(oracle.vertex_marginals(&model)?);
            }
            println!("{v}");
        }
        Command::Sample(a) => {
            let model = read_model(&a.model)?;
            let seed = SeedPath::new(a.seed.get()?);
            let scheme = match a.sampler {
                SampleMethod::ApproxPairwise => PerturbScheme::Pairwise,
                _ => PerturbScheme::Unary,
            };
            let (batch, extra) = match a.sampler {
                SampleMethod::GumbelFull => (gumbel_max_batch(&model, a.draws, &seed)?, json!({})),
                SampleMethod::ApproxUnary | SampleMethod::ApproxPairwise if a.m_replicas > 1 => {
                    let anchor = match a.anchor {
                        Some(e) => e,
                        None => *model.edges().first().ok_or_else(|| {
                            Error::InvalidInput("expansion needs an anchor edge".into())
                        })?,
                    };
                    let b =
                        expanded_map_batch(&model, anchor, a.m_replicas, scheme, a.draws, &seed)?;
                    (
                        b,
                        json!({ "m_replicas": a.m_replicas, "anchor": [anchor.0, anchor.1], "scheme": scheme }),
                    )
                }
                SampleMethod::ApproxUnary | SampleMethod::ApproxPairwise => (
                    approx_map_batch(&model, scheme, a.strategy, a.draws, &seed)?,
                    json!({ "scheme": scheme }),
                ),
                SampleMethod::Unbiased => {
                    let kind = match a.family {
                        Family::ExactLse => FamilyKind::ExactLse,
                        Family::GumbelMc => FamilyKind::GumbelMc {
                            samples: a.mc_samples,
                        },
                    };
                    let family = make_bound_family(&model, None, kind, a.strategy, &seed.child(0))?;
                    let b =
                        unbiased_batch(&family, a.draws, &mut seed.child(1).rng(), a.max_restarts)?;
                    let u0 = family.log_upper_bound()?;
                    (
                        b,
                        json!({ "family": kind, "log_upper": u0.value, "log_upper_se": u0.std_error }),
                    )
                }
            };
            write_samples(&batch, &a.out, extra)?;
        }
        Command::Baseline(a) => {
            let model = read_model(&a.model)?;
            let cfg = ChainConfig {
                sweeps: a.sweeps,
                burn_in: a.burn_in.unwrap_or(a.sweeps / 10),
                thin: a.thin,
                init: match a.init {
                    InitArg::Random => ChainInit::Random,
                    InitArg::Map => ChainInit::Map,
                },
                scan: a.scan,
            };
            let sampler = match a.sampler {
                ChainMethod::Gibbs => SamplerKind::Gibbs,
                ChainMethod::Metropolis => SamplerKind::Metropolis,
            };
            let batch = parallel_chains(
                &model,
                &cfg,
                sampler,
                a.chains,
                &SeedPath::new(a.seed.get()?),
            )?;
            write_samples(&batch, &a.out, json!({ "chain": cfg, "chains": a.chains }))?;
        }
        Command::Bounds(a) => {
            let cfg = BoundsConfig {
                rows: a.rows,
                cols: a.cols,
                field_range: a.field_range,
                coupling_grid: a.coupling_grid,
                seeds: a.seeds.0,
                mc_samples: a.mc_samples,
                replicas: a.replicas,
                bound: a.bound,
                strategy: a.strategy,
                noise_seed: a.seed.get()?,
            };
            write_bounds_csv(&bounds_report(&cfg)?, output(&a.out)?)?;
        }
        Command::Experiment(a) => {
            let spec = match &a.spec {
                Some(p) => read_sidecar(p)?,
                None => ExperimentSpec {
                    experiment: a.kind.expect("clap enforces --kind"),
                    grid_sizes: a.grid,
                    coupling_grid: a.coupling_grid,
                    seeds: a.seeds.0,
                    field_range: a.field_range,
                    mc_samples: a.mc_samples,
                    replicas: a.replicas,
                    draws: a.draws,
                    sweeps: a.sweeps,
                    trials: a.trials,
                    strategy: a.strategy,
                    seed: a.seed.get()?,
                },
            };
            let out = run_experiment(&spec, &a.out)?;
            println!("{}", json!({ "csv": out.csv, "sidecar": out.sidecar }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(match e.kind() {
                "validation" => 2,
                "resource_cap" => 3,
                _ => 1,
            })
        }
    }
}
