//! Collects labeled samples on narrow2d, clusters each class with meanshift
//! and fits the Gaussian mixtures used by the guided planners.
//!
//! cargo run --release --example fit_model -- [samples] [out.json]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safecorridor::gmm::meanshift_cluster;
use safecorridor::model::LearnedModels;
use safecorridor::robots::{generate_training_samples, SampleMode, Scenario};

fn main() -> safecorridor::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(3000, |s| s.parse().expect("sample count"));
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/narrow2d.json"))?;
    let bandwidth = 10f64.to_radians();

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let samples = generate_training_samples(&scenario, n, SampleMode::RrtTrace, &mut rng)?;
    println!(
        "{} samples from RRT traces, {:.1}% colliding",
        samples.len(),
        100.0 * samples.collision_fraction()
    );

    let colliding = samples.class(true);
    let clusters = meanshift_cluster(&colliding, bandwidth)?;
    let mut sizes = clusters.cluster_sizes();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    println!("{} collision clusters, sizes {:?}", clusters.num_clusters(), sizes);

    let models = LearnedModels::fit(&samples, bandwidth, 0.9)?;
    let guide = models.collision.as_ref().expect("colliding samples exist");
    println!("shared confidence level {:.4}", guide.levels.overall_level);
    for (c, kappa) in guide.gmm.components().iter().zip(&guide.levels.per_component).take(5) {
        println!(
            "  weight {:.3}  mean ({:+.3}, {:+.3})  kappa {:.3}",
            c.weight(),
            c.mean()[0],
            c.mean()[1],
            kappa
        );
    }
    if let Some(path) = args.get(1) {
        models.save(path)?;
        println!("model written to {path}");
    }
    Ok(())
}
