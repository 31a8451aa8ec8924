//! Task-space guided RRT on a 3-link planar arm. The end effector follows
//! corridors built from a workspace obstacle model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safecorridor::bench::attach_workspace_model;
use safecorridor::model::LearnedModels;
use safecorridor::planners::{plan, Variant};
use safecorridor::robots::{generate_training_samples, SampleMode, Scenario};

fn main() -> safecorridor::Result<()> {
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/arm3-task.json"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let samples = generate_training_samples(&scenario, 3000, SampleMode::RrtTrace, &mut rng)?;
    let mut models = LearnedModels::fit(&samples, 10f64.to_radians(), 0.9)?;
    attach_workspace_model(&mut models, &scenario, 2000, 0.1, &mut rng)?;
    let ws = models.workspace.as_ref().expect("obstacles lie inside the reach");
    println!("workspace model: {} components", ws.gmm.len());

    for variant in [Variant::Rrt, Variant::WsSgRrt, Variant::GmmWsSgRrt] {
        for seed in 0..3 {
            let cfg = scenario.planner.clone().with_variant(variant).with_seed(seed);
            let r = plan(&scenario, &cfg, &models, &mut ChaCha8Rng::seed_from_u64(seed))?;
            let s = &r.stats;
            print!(
                "{variant:>13} seed {seed}: {:<7} {:>5} extensions {:>5} checks",
                if r.success { "solved" } else { "failed" },
                s.extensions,
                s.collision_checks
            );
            if s.pinv_calls > 0 {
                print!(
                    "  pinv calls {}, step-length error {:.1e}, pinv residual {:.1e}",
                    s.pinv_calls, s.max_step_norm_error, s.max_pinv_residual
                );
            }
            println!();
        }
    }
    Ok(())
}
