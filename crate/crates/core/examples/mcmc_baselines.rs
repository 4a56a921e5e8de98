//! Gibbs and Metropolis chains compared with exact marginals.

use perturbmap::baselines::{parallel_chains, ChainConfig};
use perturbmap::exact::{empirical_vertex_marginals, mean_vertex_tv, ExactOracle};
use perturbmap::model::generate_spin_glass;
use perturbmap::samplers::SamplerKind;
use perturbmap::{SeedPath, SpinGlassConfig};

fn main() -> perturbmap::Result<()> {
    let model = generate_spin_glass(&SpinGlassConfig::new(3, 3, 0.5, 1))?;
    let exact = ExactOracle::default().vertex_marginals(&model)?;
    for sampler in [SamplerKind::Gibbs, SamplerKind::Metropolis] {
        for sweeps in [100, 1000, 10_000] {
            let batch = parallel_chains(
                &model,
                &ChainConfig::new(sweeps),
                sampler,
                4,
                &SeedPath::new(3),
            )?;
            let tv = mean_vertex_tv(
                &empirical_vertex_marginals(model.domain_sizes(), &batch.samples),
                &exact,
            );
            println!("{sampler:?} {sweeps:>6} sweeps x 4 chains: TV {tv:.4}");
        }
    }
    Ok(())
}
