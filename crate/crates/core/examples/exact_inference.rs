//! Exact log-partition function, vertex marginals and exact samples by
//! enumeration.

use perturbmap::exact::{exact_sample, ExactOracle};
use perturbmap::model::generate_spin_glass;
use perturbmap::{SeedPath, SpinGlassConfig};

fn main() -> perturbmap::Result<()> {
    let model = generate_spin_glass(&SpinGlassConfig::new(3, 3, 2.0, 1))?;
    let oracle = ExactOracle::default();
    println!("log Z = {:.6}", oracle.log_partition(&model)?);
    for (i, p) in oracle.vertex_marginals(&model)?.iter().enumerate() {
        println!("p(x_{i} = +1) = {:.4}", p[1]);
    }
    let mut rng = SeedPath::new(7).rng();
    for _ in 0..3 {
        println!("sample {:?}", exact_sample(&model, &mut rng)?.labels());
    }
    Ok(())
}
