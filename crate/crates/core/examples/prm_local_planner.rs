//! Builds PRMs on narrow2d with the straight-line and safety-guided local
//! planners from the same vertex sets and compares edge counts.
//!
//! cargo run --release --example prm_local_planner -- [model.json] [vertices] [k]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safecorridor::model::LearnedModels;
use safecorridor::planners::{prm_build, LocalPlanner};
use safecorridor::robots::{generate_training_samples, SampleMode, Scenario};

fn main() -> safecorridor::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/narrow2d.json"))?;
    let models = match args.first() {
        Some(p) => LearnedModels::load(p)?,
        None => {
            println!("no model given, learning one from 10000 samples");
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let samples = generate_training_samples(&scenario, 10_000, SampleMode::RrtTrace, &mut rng)?;
            LearnedModels::fit(&samples, 10f64.to_radians(), 0.9)?
        }
    };
    let guide = models.collision.as_ref().expect("model has no collision mixture");
    let n: usize = args.get(1).map_or(200, |s| s.parse().expect("vertices"));
    let k: usize = args.get(2).map_or(10, |s| s.parse().expect("k"));

    println!("seed  straight  guided  (largest component)");
    for seed in 0..5 {
        let build = |planner| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            prm_build(&scenario, n, k, planner, &scenario.planner, 100, &mut rng)
        };
        let straight = build(LocalPlanner::StraightLine)?;
        let guided = build(LocalPlanner::SafetyGuided(guide))?;
        println!(
            "{seed:>4}  {:>8}  {:>6}  ({} vs {})",
            straight.edges.len(),
            guided.edges.len(),
            straight.largest_component(),
            guided.largest_component()
        );
    }
    Ok(())
}
