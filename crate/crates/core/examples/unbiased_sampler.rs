//! Sequential rejection sampling with tight and Monte Carlo upper-bound
//! families.

use perturbmap::exact::log_partition;
use perturbmap::map::Strategy;
use perturbmap::model::generate_spin_glass;
use perturbmap::samplers::{acceptance_rate, make_bound_family, unbiased_batch, FamilyKind};
use perturbmap::{SeedPath, SpinGlassConfig};

fn main() -> perturbmap::Result<()> {
    let model = generate_spin_glass(&SpinGlassConfig::new(2, 2, 1.0, 5))?;
    let log_z = log_partition(&model)?;
    for kind in [FamilyKind::ExactLse, FamilyKind::GumbelMc { samples: 2000 }] {
        let family = make_bound_family(&model, None, kind, Strategy::Auto, &SeedPath::new(0))?;
        let u0 = family.log_upper_bound()?.value;
        let rate = acceptance_rate(&family, 5000, &mut SeedPath::new(1).rng())?;
        let batch = unbiased_batch(&family, 1000, &mut SeedPath::new(2).rng(), 100_000)?;
        println!(
            "{kind:?}: U_0 {u0:.4} (log Z {log_z:.4}), acceptance {:.3} vs Z/exp(U_0) {:.3}, {} restarts for {} draws",
            rate.rate,
            (log_z - u0).exp(),
            batch.restarts,
            batch.samples.len()
        );
    }
    Ok(())
}
