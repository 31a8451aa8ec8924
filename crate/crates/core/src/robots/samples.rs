use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Scenario;
use crate::error::{Error, Result};
use crate::gmm::LabeledSampleSet;
use crate::model::LearnedModels;
use crate::planners::{plan_with_checker, uniform_sample, CollisionChecker, Variant};

/// How training configurations are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Uniform draws inside the joint limits.
    Uniform,
    /// Every configuration checked by repeated standard RRT runs.
    RrtTrace,
}

impl std::str::FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "uniform" => Ok(SampleMode::Uniform),
            "rrt-trace" => Ok(SampleMode::RrtTrace),
            _ => Err(Error::InvalidConfig(format!("unknown sample mode '{s}'"))),
        }
    }
}

/// Labeled configurations (`true` = colliding) for model fitting.
///
/// In `rrt-trace` mode, RRT trials with seeds drawn from `rng` run until
/// `n` checked configurations have been collected; the set is truncated to
/// exactly `n`.
pub fn generate_training_samples<R: Rng + ?Sized>(
    scenario: &Scenario,
    n: usize,
    mode: SampleMode,
    rng: &mut R,
) -> Result<LabeledSampleSet> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let robot = &scenario.robot;
    let mut set = LabeledSampleSet::new(robot.dim());
    match mode {
        SampleMode::Uniform => {
            for _ in 0..n {
                let q = uniform_sample(&robot.joint_limits, rng);
                let hit = robot.config_collision(&q, &scenario.obstacles);
                set.push(q, hit)?;
            }
        }
        SampleMode::RrtTrace => {
            let mut config = scenario.planner.clone().with_variant(Variant::Rrt);
            config.goal_bias = None;
            let models = LearnedModels::default();
            while set.len() < n {
                let seed = rng.gen::<u64>();
                let checker = CollisionChecker::new(robot, &scenario.obstacles, config.resolution).recording();
                let mut trial_rng = ChaCha8Rng::seed_from_u64(seed);
                let (_, record) = plan_with_checker(scenario, &config, &models, checker, &mut trial_rng)?;
                if record.is_empty() {
                    return Err(Error::InvalidConfig("RRT trace produced no collision checks".into()));
                }
                for (q, hit) in record {
                    set.push(q, hit)?;
                }
            }
            set.truncate(n);
        }
    }
    Ok(set)
}

/// End-effector positions drawn uniformly over the arm's reach box,
/// labeled by obstacle containment.
pub fn generate_workspace_samples<R: Rng + ?Sized>(
    scenario: &Scenario,
    n: usize,
    rng: &mut R,
) -> Result<LabeledSampleSet> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let bounds = scenario.robot.workspace_bounds();
    let mut set = LabeledSampleSet::new(bounds.len());
    for _ in 0..n {
        let x: DVector<f64> = uniform_sample(&bounds, rng);
        let hit = scenario.obstacles.contains_point(x.as_slice());
        set.push(x, hit)?;
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planners::PlannerConfig;
    use crate::robots::{Circle, ObstacleSet, Robot};

    fn scenario(obstacles: ObstacleSet, start: &[f64]) -> Scenario {
        Scenario::new(
            "t",
            Robot::point(vec![[0.0, 2.0], [0.0, 2.0]]),
            obstacles,
            DVector::from_row_slice(start),
            DVector::from_row_slice(&[1.9, 1.9]),
            PlannerConfig {
                budget: 300,
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn blob() -> ObstacleSet {
        ObstacleSet {
            circles: vec![Circle {
                center: vec![1.0, 1.0],
                radius: 0.5,
            }],
            ..Default::default()
        }
    }

    #[test]
    fn free_scenario_has_no_colliding_labels() {
        let s = scenario(ObstacleSet::default(), &[0.1, 0.1]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for mode in [SampleMode::Uniform, SampleMode::RrtTrace] {
            let set = generate_training_samples(&s, 500, mode, &mut rng).unwrap();
            assert_eq!(set.len(), 500);
            assert_eq!(set.collision_fraction(), 0.0);
        }
    }

    #[test]
    fn blocked_start() {
        let s = scenario(blob(), &[1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            generate_training_samples(&s, 100, SampleMode::RrtTrace, &mut rng),
            Err(Error::InvalidEndpoints)
        ));
        assert!(generate_training_samples(&s, 100, SampleMode::Uniform, &mut rng).is_ok());
    }

    #[test]
    fn trace_is_reproducible() {
        let s = scenario(blob(), &[0.1, 0.1]);
        let a = generate_training_samples(&s, 2000, SampleMode::RrtTrace, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = generate_training_samples(&s, 2000, SampleMode::RrtTrace, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a.points(), b.points());
        assert_eq!(a.labels(), b.labels());
        assert!(a.collision_fraction() > 0.0);
    }

    #[test]
    fn workspace_labels_follow_obstacles() {
        let s = scenario(blob(), &[0.1, 0.1]);
        let set = generate_workspace_samples(&s, 1000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for (p, &l) in set.points().iter().zip(set.labels()) {
            assert_eq!(l, (p - DVector::from_vec(vec![1.0, 1.0])).norm() <= 0.5);
        }
    }
}
