//! Sampling from the free-space mixture lands in free space more often than
//! uniform sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safecorridor::model::LearnedModels;
use safecorridor::planners::{gmm_biased_sample, uniform_sample};
use safecorridor::robots::{generate_training_samples, SampleMode, Scenario};

fn main() -> safecorridor::Result<()> {
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/passage-point2d.json"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let samples = generate_training_samples(&scenario, 3000, SampleMode::RrtTrace, &mut rng)?;
    let models = LearnedModels::fit(&samples, 0.1, 0.9)?;
    let free = models.free.as_ref().expect("free samples exist");
    println!("free-space mixture with {} components", free.len());

    let limits = &scenario.robot.joint_limits;
    let n = 1000;
    let free_fraction = |draw: &mut dyn FnMut() -> nalgebra::DVector<f64>| {
        let hits = (0..n)
            .filter(|_| !scenario.robot.config_collision(&draw(), &scenario.obstacles))
            .count();
        hits as f64 / n as f64
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let uniform = free_fraction(&mut || uniform_sample(limits, &mut rng));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let biased = free_fraction(&mut || gmm_biased_sample(free, limits, &mut rng));
    println!("collision-free fraction: uniform {uniform:.3}, mixture {biased:.3}");
    Ok(())
}
