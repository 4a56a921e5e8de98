//! Approximate samples from low-dimensional perturbations, with and without
//! replicating subtrees around an anchor edge.

use perturbmap::exact::{total_variation, ExactOracle};
use perturbmap::map::Strategy;
use perturbmap::model::generate_spin_glass;
use perturbmap::perturbation::PerturbScheme;
use perturbmap::samplers::{approx_map_batch, approx_pair_marginal};
use perturbmap::{SeedPath, SpinGlassConfig};

fn main() -> perturbmap::Result<()> {
    let grid = generate_spin_glass(&SpinGlassConfig::new(3, 3, 1.0, 1))?;
    let batch = approx_map_batch(
        &grid,
        PerturbScheme::Unary,
        Strategy::Auto,
        1000,
        &SeedPath::new(0),
    )?;
    println!(
        "first unary-perturbed sample {:?}",
        batch.samples[0].labels()
    );

    // an 8-vertex chain is a tree, so the expansion applies
    let chain = generate_spin_glass(&SpinGlassConfig::new(1, 8, 2.0, 4))?;
    let anchor = (3, 4);
    let exact = ExactOracle::default().marginal(&chain, &[anchor.0, anchor.1])?;
    for m in [1, 5] {
        let est = approx_pair_marginal(
            &chain,
            anchor,
            m,
            20_000,
            PerturbScheme::Edges,
            &SeedPath::new(1),
        )?;
        println!(
            "m = {m}: anchor-pair TV {:.4}",
            total_variation(&est.table, &exact)?
        );
    }
    Ok(())
}
