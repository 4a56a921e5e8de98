//! The three MAP solvers on the models each one accepts.

use perturbmap::map::{exhaustive_map, graphcut_map, solve_map, tree_map, Strategy};
use perturbmap::model::generate_spin_glass;
use perturbmap::perturbation::perturb_unary;
use perturbmap::{PairwiseModel, SeedPath, SpinGlassConfig};

fn main() -> perturbmap::Result<()> {
    // attractive grid with unary noise: graph cut
    let grid = generate_spin_glass(&SpinGlassConfig::new(4, 4, 1.5, 3))?;
    let noisy = perturb_unary(&grid, &mut SeedPath::new(0).rng());
    let cut = graphcut_map(&noisy)?;
    let brute = exhaustive_map(&noisy)?;
    println!("graph cut {:.6}, exhaustive {:.6}", cut.value, brute.value);

    // a three-label chain: max-product
    let chain = PairwiseModel::new(
        vec![3, 3, 3],
        vec![
            vec![0.0, 1.0, 0.5],
            vec![0.2, 0.0, 0.1],
            vec![1.0, 0.0, 0.0],
        ],
        vec![(0, 1), (1, 2)],
        vec![vec![vec![1.0, 0.0, 0.0]; 3]; 2],
    )?;
    let tree = tree_map(&chain)?;
    println!(
        "tree argmax {:?} value {:.3}",
        tree.argmax.labels(),
        tree.value
    );

    let auto = solve_map(&grid, Strategy::Auto)?;
    println!("auto picked {:?}", auto.solver);
    Ok(())
}
