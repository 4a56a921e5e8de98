//! Runs the three spin-glass experiments at a small size and writes CSV plus
//! JSON sidecars to a temporary directory.

use perturbmap::experiment::{run_experiment, ExperimentKind, ExperimentSpec};

fn main() -> perturbmap::Result<()> {
    let dir = std::env::temp_dir().join("perturbmap-experiments");
    std::fs::create_dir_all(&dir)?;
    for kind in [
        ExperimentKind::LowerBounds,
        ExperimentKind::MarginalError,
        ExperimentKind::Acceptance,
    ] {
        let mut spec = ExperimentSpec::new(kind);
        spec.seeds = (0..3).collect();
        spec.mc_samples = 1000;
        spec.draws = 500;
        spec.sweeps = 500;
        spec.trials = 100;
        spec.seed = 1;
        let out = run_experiment(&spec, &dir.join(format!("{kind:?}.csv").to_lowercase()))?;
        println!("{kind:?}: {}", out.csv.display());
        print!(
            "{}",
            std::fs::read_to_string(&out.csv)?
                .lines()
                .take(3)
                .collect::<Vec<_>>()
                .join("\n")
        );
        println!();
    }
    Ok(())
}
