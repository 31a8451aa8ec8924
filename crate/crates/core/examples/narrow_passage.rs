//! RRT against SG-RRT on narrow2d: collision checks, colliding-extension
//! fraction and a rank test, plus an SVG of one guided run.
//!
//! cargo run --release --example narrow_passage -- [seeds] [model.json]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safecorridor::model::LearnedModels;
use safecorridor::planners::{plan, Variant};
use safecorridor::plot::scene_svg;
use safecorridor::robots::{generate_training_samples, SampleMode, Scenario};
use safecorridor::stats::{mann_whitney, median};

fn main() -> safecorridor::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = args.first().map_or(10, |s| s.parse().expect("seed count"));
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/narrow2d.json"))?;
    let models = match args.get(1) {
        Some(p) => LearnedModels::load(p)?,
        None => {
            println!("learning a model from 10000 samples");
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let samples = generate_training_samples(&scenario, 10_000, SampleMode::RrtTrace, &mut rng)?;
            LearnedModels::fit(&samples, 10f64.to_radians(), 0.9)?
        }
    };

    let mut checks = Vec::new();
    for variant in [Variant::Rrt, Variant::SgRrt] {
        let (mut c, mut found, mut ext, mut bad) = (Vec::new(), 0, 0, 0);
        for seed in 0..seeds {
            let cfg = scenario.planner.clone().with_variant(variant).with_seed(seed);
            let r = plan(&scenario, &cfg, &models, &mut ChaCha8Rng::seed_from_u64(seed))?;
            c.push(r.stats.collision_checks as f64);
            found += r.success as usize;
            ext += r.stats.extensions;
            bad += r.stats.colliding_extensions;
        }
        println!(
            "{variant:>7}: solved {found}/{seeds}, median collision checks {:.0}, colliding extensions {:.3}",
            median(&c),
            bad as f64 / ext as f64
        );
        checks.push(c);
    }
    let test = mann_whitney(&checks[1], &checks[0]);
    println!("one-sided rank test p = {:.4}", test.p_less);

    let cfg = scenario.planner.clone().with_variant(Variant::SgRrt);
    let r = plan(&scenario, &cfg, &models, &mut ChaCha8Rng::seed_from_u64(0))?;
    let out = std::env::temp_dir().join("narrow2d_sg_rrt.svg");
    std::fs::write(&out, scene_svg(&scenario, Some(&r))?).expect("write svg");
    println!("tree and path drawn to {}", out.display());
    Ok(())
}
