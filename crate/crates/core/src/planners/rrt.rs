use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::extend::{extend, CollisionChecker, ExtendContext, Steering};
use super::sampling::{gmm_biased_sample, uniform_sample};
use super::tree::Tree;
use super::{PlanStats, PlannerConfig, Variant};
use crate::error::{Error, Result};
use crate::gmm::GaussianMixture;
use crate::model::LearnedModels;
use crate::robots::Scenario;

/// Samples drawn per unit of extension budget before giving up; guards
/// against runs where no sample ever produces an extension.
const SAMPLES_PER_EXTENSION: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanResult {
    pub variant: Variant,
    pub seed: u64,
    pub success: bool,
    /// Start to goal, one configuration per entry.
    pub path: Option<Vec<Vec<f64>>>,
    pub stats: PlanStats,
    /// Start tree first; the goal tree second for bidirectional variants.
    #[serde(skip)]
    pub trees: Vec<Tree>,
}

impl PlanResult {
    pub fn path_configs(&self) -> Vec<DVector<f64>> {
        self.path
            .iter()
            .flatten()
            .map(|q| DVector::from_column_slice(q))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs `config.variant` on `scenario`.
pub fn plan<R: Rng + ?Sized>(
    scenario: &Scenario,
    config: &PlannerConfig,
    models: &LearnedModels,
    rng: &mut R,
) -> Result<PlanResult> {
    let checker = CollisionChecker::new(&scenario.robot, &scenario.obstacles, config.resolution);
    plan_with_checker(scenario, config, models, checker, rng).map(|(r, _)| r)
}

/// [`plan`] with a caller-supplied checker; returns whatever the checker
/// recorded alongside the result.
pub fn plan_with_checker<R: Rng + ?Sized>(
    scenario: &Scenario,
    config: &PlannerConfig,
    models: &LearnedModels,
    checker: CollisionChecker<'_>,
    rng: &mut R,
) -> Result<(PlanResult, Vec<(DVector<f64>, bool)>)> {
    config.validate()?;
    let robot = &scenario.robot;
    let (start, goal) = (&scenario.start, &scenario.goal);
    if robot.config_collision(start, &scenario.obstacles) || robot.config_collision(goal, &scenario.obstacles) {
        return Err(Error::InvalidEndpoints);
    }
    let steering = steering_for(scenario, config.variant, models)?;
    let free = if config.variant.uses_free_model() {
        Some(models.free.as_ref().ok_or_else(|| missing("free-space"))?)
    } else {
        None
    };
    let sampler = Sampler {
        free,
        limits: &robot.joint_limits,
        goal,
        goal_bias: config.effective_goal_bias(),
    };

    let clock = Instant::now();
    let mut ctx = ExtendContext::new(checker, config);
    let (path, trees) = if config.variant.is_bidirectional() {
        grow_connect(&mut ctx, start, goal, steering, &sampler, rng)
    } else {
        grow_single(&mut ctx, start, goal, steering, &sampler, rng)
    };
    let mut stats = ctx.stats;
    stats.collision_checks = ctx.checker.checks;
    stats.tree_nodes = trees.iter().map(Tree::len).sum();
    stats.wall_time_ms = clock.elapsed().as_secs_f64() * 1e3;
    let record = ctx.checker.take_record();
    let result = PlanResult {
        variant: config.variant,
        seed: config.seed,
        success: path.is_some(),
        path: path.map(|p| p.iter().map(|q| q.iter().copied().collect()).collect()),
        stats,
        trees,
    };
    Ok((result, record))
}

fn missing(what: &str) -> Error {
    Error::InvalidConfig(format!("variant needs a {what} model"))
}

fn steering_for<'a>(scenario: &'a Scenario, variant: Variant, models: &'a LearnedModels) -> Result<Steering<'a>> {
    if variant.uses_collision_model() {
        let m = models.collision.as_ref().ok_or_else(|| missing("collision"))?;
        if m.gmm.dim() != scenario.robot.dim() {
            return Err(Error::DimensionMismatch {
                expected: scenario.robot.dim(),
                actual: m.gmm.dim(),
            });
        }
        Ok(Steering::Config(m))
    } else if variant.uses_workspace_model() {
        let arm = scenario
            .robot
            .arm()
            .ok_or_else(|| Error::InvalidConfig("task-space steering needs an arm".into()))?;
        let m = models.workspace.as_ref().ok_or_else(|| missing("workspace"))?;
        if m.gmm.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: m.gmm.dim(),
            });
        }
        Ok(Steering::Task { arm, model: m })
    } else {
        Ok(Steering::Straight)
    }
}

struct Sampler<'a> {
    free: Option<&'a GaussianMixture>,
    limits: &'a Vec<[f64; 2]>,
    goal: &'a DVector<f64>,
    goal_bias: f64,
}

impl Sampler<'_> {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        if self.goal_bias > 0.0 && rng.gen::<f64>() < self.goal_bias {
            return self.goal.clone();
        }
        match self.free {
            Some(g) => gmm_biased_sample(g, self.limits, rng),
            None => uniform_sample(self.limits, rng),
        }
    }
}

fn keep_sampling(ctx: &ExtendContext<'_>) -> bool {
    ctx.budget_left() && ctx.stats.samples < ctx.config.budget.saturating_mul(SAMPLES_PER_EXTENSION)
}

/// Adds `goal` below node `i` when the connecting segment is free.
fn connect_goal(ctx: &mut ExtendContext<'_>, tree: &mut Tree, i: usize, goal: &DVector<f64>) -> Option<usize> {
    if tree.node(i) == goal {
        return Some(i);
    }
    let q = tree.node(i).clone();
    if ctx.checker.extension_free(&q, goal) {
        Some(tree.add(goal.clone(), i))
    } else {
        None
    }
}

fn grow_single<R: Rng + ?Sized>(
    ctx: &mut ExtendContext<'_>,
    start: &DVector<f64>,
    goal: &DVector<f64>,
    steering: Steering<'_>,
    sampler: &Sampler<'_>,
    rng: &mut R,
) -> (Option<Vec<DVector<f64>>>, Vec<Tree>) {
    let mut tree = Tree::new(start.clone());
    if (start - goal).norm() <= ctx.config.d_min {
        if let Some(g) = connect_goal(ctx, &mut tree, 0, goal) {
            let path = tree.path_from_root(g);
            return (Some(path), vec![tree]);
        }
    }
    while keep_sampling(ctx) {
        let q_rand = sampler.draw(rng);
        ctx.stats.samples += 1;
        let out = extend(ctx, &mut tree, &q_rand, steering, Some(goal));
        if let Some(i) = out.reached {
            if let Some(g) = connect_goal(ctx, &mut tree, i, goal) {
                let path = tree.path_from_root(g);
                return (Some(path), vec![tree]);
            }
        }
    }
    (None, vec![tree])
}

fn grow_connect<R: Rng + ?Sized>(
    ctx: &mut ExtendContext<'_>,
    start: &DVector<f64>,
    goal: &DVector<f64>,
    steering: Steering<'_>,
    sampler: &Sampler<'_>,
    rng: &mut R,
) -> (Option<Vec<DVector<f64>>>, Vec<Tree>) {
    let mut trees = [Tree::new(start.clone()), Tree::new(goal.clone())];
    if (start - goal).norm() <= ctx.config.d_min {
        if let Some(g) = connect_goal(ctx, &mut trees[0], 0, goal) {
            let path = trees[0].path_from_root(g);
            return (Some(path), trees.into());
        }
    }
    // index of the tree extended toward the random sample this round
    let mut a = 0;
    while keep_sampling(ctx) {
        let q_rand = sampler.draw(rng);
        ctx.stats.samples += 1;
        let b = 1 - a;
        let out = extend(ctx, &mut trees[a], &q_rand, steering, None);
        if let Some(&new) = out.added.last() {
            let q_new = trees[a].node(new).clone();
            let back = extend(ctx, &mut trees[b], &q_new, steering, Some(&q_new));
            if let Some(bi) = back.reached {
                let q_b = trees[b].node(bi).clone();
                if q_b == q_new || ctx.checker.extension_free(&q_b, &q_new) {
                    let (si, gi) = if a == 0 { (new, bi) } else { (bi, new) };
                    let mut path = trees[0].path_from_root(si);
                    let mut tail = trees[1].path_from_root(gi);
                    tail.reverse();
                    if path.last() == tail.first() {
                        tail.remove(0);
                    }
                    path.extend(tail);
                    return (Some(path), trees.into());
                }
            }
        }
        a = b;
    }
    (None, trees.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robots::{Circle, ObstacleSet, Robot};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point_scenario(obstacles: ObstacleSet, start: &[f64], goal: &[f64]) -> Scenario {
        Scenario::new(
            "t",
            Robot::point(vec![[0.0, 2.0], [0.0, 2.0]]),
            obstacles,
            DVector::from_row_slice(start),
            DVector::from_row_slice(goal),
            PlannerConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn adjacent_goal_costs_one_check() {
        let s = point_scenario(ObstacleSet::default(), &[1.0, 1.0], &[1.04, 1.0]);
        let cfg = PlannerConfig::default();
        let r = plan(&s, &cfg, &LearnedModels::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(r.success);
        assert_eq!(r.path.as_ref().unwrap().len(), 2);
        assert_eq!(r.stats.collision_checks, 1);
        assert_eq!(r.stats.samples, 0);
    }

    #[test]
    fn colliding_endpoint_is_rejected() {
        let obs = ObstacleSet {
            circles: vec![Circle {
                center: vec![1.0, 1.0],
                radius: 0.2,
            }],
            ..Default::default()
        };
        let s = point_scenario(obs, &[1.0, 1.0], &[0.1, 0.1]);
        let r = plan(
            &s,
            &PlannerConfig::default(),
            &LearnedModels::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(matches!(r, Err(Error::InvalidEndpoints)));
    }

    #[test]
    fn free_space_always_solved() {
        let s = point_scenario(ObstacleSet::default(), &[0.1, 0.1], &[1.9, 1.9]);
        for v in [Variant::Rrt, Variant::RrtBiased, Variant::RrtConnect] {
            for seed in 0..100 {
                let cfg = PlannerConfig::default().with_variant(v).with_seed(seed);
                let r = plan(
                    &s,
                    &cfg,
                    &LearnedModels::default(),
                    &mut ChaCha8Rng::seed_from_u64(seed),
                )
                .unwrap();
                assert!(r.success, "{v} seed {seed}");
                let path = r.path_configs();
                assert_eq!(path.first().unwrap(), &s.start);
                assert_eq!(path.last().unwrap(), &s.goal);
                for w in path.windows(2) {
                    assert!((&w[1] - &w[0]).norm() <= cfg.delta + 1e-12);
                }
            }
        }
    }

    #[test]
    fn missing_model_is_an_error() {
        let s = point_scenario(ObstacleSet::default(), &[0.1, 0.1], &[1.9, 1.9]);
        let cfg = PlannerConfig::default().with_variant(Variant::SgRrt);
        let r = plan(&s, &cfg, &LearnedModels::default(), &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }
}
