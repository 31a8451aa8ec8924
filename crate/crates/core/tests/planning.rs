use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use safecorridor::bench::{run_bench, BenchSpec};
use safecorridor::model::LearnedModels;
use safecorridor::planners::{gmm_biased_sample, plan, uniform_sample, CollisionChecker, PlanResult, Variant};
use safecorridor::robots::{generate_training_samples, SampleMode, Scenario};

const SCENARIOS: [&str; 5] = ["narrow2d", "shelf2d", "passage-point2d", "passage-point3d", "arm3-task"];

fn scenario(name: &str) -> Scenario {
    let path = format!("{}/scenarios/{name}.json", env!("CARGO_MANIFEST_DIR"));
    Scenario::load(path).unwrap()
}

fn models_for(s: &Scenario, n: usize, bandwidth: f64) -> LearnedModels {
    let samples = generate_training_samples(s, n, SampleMode::RrtTrace, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    LearnedModels::fit(&samples, bandwidth, 0.9).unwrap()
}

fn run(s: &Scenario, v: Variant, models: &LearnedModels, seed: u64, budget: usize) -> PlanResult {
    let mut cfg = s.planner.clone().with_variant(v).with_seed(seed);
    cfg.budget = budget;
    plan(s, &cfg, models, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn same_outcome(a: &PlanResult, b: &PlanResult) -> bool {
    let mut sa = a.stats.clone();
    let mut sb = b.stats.clone();
    sa.wall_time_ms = 0.0;
    sb.wall_time_ms = 0.0;
    a.path == b.path && sa == sb && a.trees == b.trees
}

#[test]
fn shipped_scenarios_have_free_endpoints() {
    for name in SCENARIOS {
        let s = scenario(name);
        assert!(!s.robot.config_collision(&s.start, &s.obstacles), "{name} start");
        assert!(!s.robot.config_collision(&s.goal, &s.obstacles), "{name} goal");
    }
}

#[test]
fn every_tree_edge_and_path_segment_is_free() {
    let s = scenario("narrow2d");
    let models = models_for(&s, 1500, 10f64.to_radians());
    for v in [
        Variant::Rrt,
        Variant::SgRrt,
        Variant::RrtConnect,
        Variant::SgRrtConnect,
        Variant::GmmSgRrt,
    ] {
        for seed in 0..3 {
            let r = run(&s, v, &models, seed, 1500);
            let mut checker = CollisionChecker::new(&s.robot, &s.obstacles, s.planner.resolution);
            for tree in &r.trees {
                for (p, c) in tree.edges() {
                    assert!(
                        checker.segment_free(tree.node(p), tree.node(c)),
                        "{v} seed {seed}: edge {p}->{c}"
                    );
                }
            }
            if let Some(path) = &r.path {
                assert_eq!(path.first().unwrap().as_slice(), s.start.as_slice());
                assert_eq!(path.last().unwrap().as_slice(), s.goal.as_slice());
                for w in path.windows(2) {
                    let (a, b) = (DVector::from_column_slice(&w[0]), DVector::from_column_slice(&w[1]));
                    assert!(checker.segment_free(&a, &b));
                }
            }
        }
    }
}

#[test]
fn identical_seeds_give_identical_results() {
    let s = scenario("shelf2d");
    let mut models = models_for(&s, 1000, 10f64.to_radians());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    safecorridor::bench::attach_workspace_model(&mut models, &s, 1000, 0.1, &mut rng).unwrap();
    for v in Variant::ALL {
        let a = run(&s, v, &models, 11, 800);
        let b = run(&s, v, &models, 11, 800);
        assert!(same_outcome(&a, &b), "{v}");
        let c = run(&s, v, &models, 12, 800);
        assert!(!same_outcome(&a, &c), "{v} ignores its seed");
    }
}

#[test]
fn extension_steps_respect_delta() {
    let s = scenario("passage-point3d");
    let models = models_for(&s, 800, 0.1);
    for v in [Variant::Rrt, Variant::SgRrt, Variant::RrtConnect] {
        let r = run(&s, v, &models, 1, 1000);
        for tree in &r.trees {
            for (p, c) in tree.edges() {
                assert!((tree.node(p) - tree.node(c)).norm() <= s.planner.delta + 1e-12);
            }
        }
    }
}

#[test]
fn mixture_samples_are_free_more_often_than_uniform() {
    let s = scenario("narrow2d");
    let models = models_for(&s, 3000, 10f64.to_radians());
    let free = models.free.as_ref().unwrap();
    let limits = &s.robot.joint_limits;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let count = |qs: Vec<DVector<f64>>| qs.iter().filter(|q| !s.robot.config_collision(q, &s.obstacles)).count();
    let uniform = count((0..1000).map(|_| uniform_sample(limits, &mut rng)).collect());
    let biased = count((0..1000).map(|_| gmm_biased_sample(free, limits, &mut rng)).collect());
    assert!(biased >= uniform, "biased {biased} vs uniform {uniform}");
}

#[test]
fn bench_rows_do_not_depend_on_scheduling() {
    let spec = BenchSpec {
        scenarios: vec![format!("{}/scenarios/passage-point2d.json", env!("CARGO_MANIFEST_DIR")).into()],
        variants: vec![Variant::Rrt, Variant::SgRrt],
        seed_start: 5,
        seeds: 4,
        training_sizes: vec![200, 400],
        model: None,
        sample_mode: SampleMode::RrtTrace,
        bandwidth: 0.1,
        kappa: 0.9,
        model_seed: 1,
        budget: Some(2000),
        out_dir: std::env::temp_dir(),
    };
    let strip = |mut rows: Vec<safecorridor::bench::BenchRow>| {
        rows.iter_mut().for_each(|r| r.wall_time_ms = 0.0);
        rows
    };
    let a = strip(run_bench(&spec).unwrap());
    let b = strip(run_bench(&spec).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.len(), 2 * 2 * 4);
    assert_eq!(a[0].training_samples, Some(200));
    assert_eq!(a[0].seed, 5);
    assert_eq!(a.last().unwrap().variant, "sg-rrt");
}
