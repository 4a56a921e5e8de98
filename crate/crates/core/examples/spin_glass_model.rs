//! Builds a small spin glass, prints it as JSON and evaluates a few energies.

use perturbmap::model::{generate_spin_glass, spin_of};
use perturbmap::{Assignment, SpinGlassConfig};

fn main() -> perturbmap::Result<()> {
    let model = generate_spin_glass(&SpinGlassConfig::new(2, 2, 1.0, 42))?;
    println!("{}", model.to_json());
    println!(
        "vertices {}, edges {}, attractive {}",
        model.num_vertices(),
        model.num_edges(),
        model.is_attractive()
    );
    for labels in [vec![1, 1, 1, 1], vec![0, 0, 0, 0], vec![1, 0, 1, 0]] {
        let spins: Vec<f64> = labels.iter().map(|&l| spin_of(l)).collect();
        println!(
            "spins {spins:?}: energy {:.6}",
            model.energy(&Assignment::new(labels))?
        );
    }
    Ok(())
}
