//! Upper, expected lower and probable lower bounds on log Z.

use perturbmap::bounds::{
    lower_bound_expected, lower_bound_probable, probable_bound_confidence, singleton_subsets,
    upper_bound,
};
use perturbmap::exact::log_partition;
use perturbmap::map::Strategy;
use perturbmap::model::generate_spin_glass;
use perturbmap::{SeedPath, SpinGlassConfig};

fn main() -> perturbmap::Result<()> {
    let model = generate_spin_glass(&SpinGlassConfig::new(3, 3, 1.0, 2))?;
    let n = model.num_vertices();
    let upper = upper_bound(&model, 2000, Strategy::Auto, &SeedPath::new(0))?;
    let lower = lower_bound_expected(
        &model,
        &singleton_subsets(n),
        2000,
        Strategy::Auto,
        &SeedPath::new(1),
    )?;
    let replicas = vec![20; n];
    let probable = lower_bound_probable(
        &model,
        &replicas,
        Strategy::Auto,
        &mut SeedPath::new(2).rng(),
    )?;
    println!(
        "expected lower {:.4} ± {:.4}",
        lower.value,
        lower.std_error.unwrap_or(0.0)
    );
    println!("log Z          {:.4}", log_partition(&model)?);
    println!(
        "upper          {:.4} ± {:.4}",
        upper.value,
        upper.std_error.unwrap_or(0.0)
    );
    println!(
        "probable lower {:.4} (Chebyshev confidence at ε = 1: {:.3})",
        probable.value,
        probable_bound_confidence(model.domain_sizes(), &replicas, 1.0)
    );
    Ok(())
}
