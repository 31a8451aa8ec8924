//! Robot models, collision predicates, scenarios and training-sample
//! generation.

mod arm;
mod obstacles;
mod samples;
mod scenario;

pub use arm::{jacobian_pinv, ArmPose, PlanarArm, MAX_JJT_CONDITION};
pub use obstacles::{AaBox, Circle, ObstacleSet};
pub use samples::{generate_training_samples, generate_workspace_samples, SampleMode};
pub use scenario::{Scenario, ScenarioFile};

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

/// Closed interval `[lo, hi]` per configuration coordinate.
pub type JointLimits = Vec<[f64; 2]>;

pub fn default_joint_limits(dof: usize) -> JointLimits {
    vec![[-PI, PI]; dof]
}

/// A point moving in an axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRobot {
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RobotKind {
    PlanarArm(PlanarArm),
    Point(PointRobot),
}

/// Kinematic model plus configuration-space box.
#[derive(Debug, Clone, PartialEq)]
pub struct Robot {
    pub kind: RobotKind,
    pub joint_limits: JointLimits,
}

impl Robot {
    pub fn planar_arm(arm: PlanarArm) -> Self {
        let limits = default_joint_limits(arm.dof());
        Robot {
            kind: RobotKind::PlanarArm(arm),
            joint_limits: limits,
        }
    }

    pub fn point(limits: JointLimits) -> Self {
        Robot {
            kind: RobotKind::Point(PointRobot { dim: limits.len() }),
            joint_limits: limits,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            RobotKind::PlanarArm(a) => a.dof(),
            RobotKind::Point(p) => p.dim,
        }
    }

    /// Dimension of the space obstacles live in.
    pub fn workspace_dim(&self) -> usize {
        match &self.kind {
            RobotKind::PlanarArm(_) => 2,
            RobotKind::Point(p) => p.dim,
        }
    }

    pub fn arm(&self) -> Option<&PlanarArm> {
        match &self.kind {
            RobotKind::PlanarArm(a) => Some(a),
            RobotKind::Point(_) => None,
        }
    }

    pub fn within_limits(&self, q: &DVector<f64>) -> bool {
        q.len() == self.joint_limits.len()
            && q.iter()
                .zip(&self.joint_limits)
                .all(|(v, [lo, hi])| *v >= *lo && *v <= *hi)
    }

    /// True when `q` leaves the joint limits or any link (or the point)
    /// touches an obstacle. Links are zero-width segments.
    pub fn config_collision(&self, q: &DVector<f64>, obstacles: &ObstacleSet) -> bool {
        if !self.within_limits(q) {
            return true;
        }
        match &self.kind {
            RobotKind::Point(_) => obstacles.contains_point(q.as_slice()),
            RobotKind::PlanarArm(arm) => {
                let pose = match arm.forward_kinematics(q) {
                    Ok(p) => p,
                    Err(_) => return true,
                };
                pose.joints
                    .windows(2)
                    .any(|w| obstacles.intersects_segment(w[0].as_slice(), w[1].as_slice()))
            }
        }
    }

    /// Axis-aligned bounds of the reachable workspace.
    pub fn workspace_bounds(&self) -> JointLimits {
        match &self.kind {
            RobotKind::PlanarArm(a) => {
                let r = a.reach();
                vec![[a.base[0] - r, a.base[0] + r], [a.base[1] - r, a.base[1] + r]]
            }
            RobotKind::Point(_) => self.joint_limits.clone(),
        }
    }
}

/// Outcome of a straight-line check in configuration space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentCheck {
    pub free: bool,
    /// Configurations evaluated before returning.
    pub checks: usize,
}

/// Number of interpolation intervals for a segment of `length` so that the
/// spacing does not exceed `resolution`.
pub fn segment_steps(length: f64, resolution: f64) -> usize {
    if length <= 0.0 {
        return 0;
    }
    let ratio = length / resolution;
    // absorb rounding so that e.g. 1.0 / 0.1 gives 10 intervals, not 11
    (ratio - 1e-9 * ratio.max(1.0)).ceil().max(1.0) as usize
}

/// Evaluates configurations along `q1→q2` at spacing ≤ `resolution`,
/// endpoints included, stopping at the first collision.
pub fn segment_collision_free(
    robot: &Robot,
    q1: &DVector<f64>,
    q2: &DVector<f64>,
    resolution: f64,
    obstacles: &ObstacleSet,
) -> Result<SegmentCheck> {
    check_dim(robot.dim(), q1.len())?;
    check_dim(robot.dim(), q2.len())?;
    Ok(walk_segment(q1, q2, resolution, |q| {
        robot.config_collision(q, obstacles)
    }))
}

pub(crate) fn walk_segment(
    q1: &DVector<f64>,
    q2: &DVector<f64>,
    resolution: f64,
    mut collides: impl FnMut(&DVector<f64>) -> bool,
) -> SegmentCheck {
    let steps = segment_steps((q2 - q1).norm(), resolution);
    let mut checks = 0;
    for i in 0..=steps {
        let q = if i == 0 {
            q1.clone()
        } else if i == steps {
            q2.clone()
        } else {
            q1 + (q2 - q1) * (i as f64 / steps as f64)
        };
        checks += 1;
        if collides(&q) {
            return SegmentCheck { free: false, checks };
        }
    }
    SegmentCheck { free: true, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    fn point2() -> Robot {
        Robot::point(vec![[-5.0, 5.0], [-5.0, 5.0]])
    }

    #[test]
    fn no_obstacles_never_collide_within_limits() {
        let arm = Robot::planar_arm(PlanarArm::new(vec![0.4, 1.6]).unwrap());
        let empty = ObstacleSet::default();
        for i in 0..50 {
            let t = i as f64 * 0.1 - 2.5;
            assert!(!arm.config_collision(&q(&[t, -t * 0.7]), &empty));
        }
        assert!(arm.config_collision(&q(&[3.5, 0.0]), &empty));
    }

    #[test]
    fn point_at_circle_center_collides() {
        let obs = ObstacleSet {
            circles: vec![Circle {
                center: vec![1.0, 1.0],
                radius: 0.2,
            }],
            ..Default::default()
        };
        assert!(point2().config_collision(&q(&[1.0, 1.0]), &obs));
        assert!(!point2().config_collision(&q(&[1.5, 1.0]), &obs));
    }

    #[test]
    fn elbow_inside_box_collides() {
        let arm = Robot::planar_arm(PlanarArm::new(vec![1.0, 1.0]).unwrap());
        // elbow at (0, 1) for q = (π/2, 0)
        let obs = ObstacleSet {
            boxes: vec![AaBox {
                min: vec![-0.1, 0.9],
                max: vec![0.1, 1.1],
            }],
            ..Default::default()
        };
        let qa = q(&[std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2]);
        assert!(arm.config_collision(&qa, &obs));
        // dense-sampling oracle along both links
        let pose = arm.arm().unwrap().forward_kinematics(&qa).unwrap();
        let hit = pose.joints.windows(2).any(|w| {
            (0..=1000).any(|i| {
                let p = w[0] + (w[1] - w[0]) * (i as f64 / 1000.0);
                obs.contains_point(p.as_slice())
            })
        });
        assert!(hit);
    }

    #[test]
    fn segment_check_counts() {
        let r = point2();
        let empty = ObstacleSet::default();
        let one = segment_collision_free(&r, &q(&[0.0, 0.0]), &q(&[0.0, 0.0]), 0.1, &empty).unwrap();
        assert_eq!(one, SegmentCheck { free: true, checks: 1 });
        let s = segment_collision_free(&r, &q(&[0.0, 0.0]), &q(&[1.0, 0.0]), 0.1, &empty).unwrap();
        assert_eq!(s, SegmentCheck { free: true, checks: 11 });

        let blocked = ObstacleSet {
            circles: vec![Circle {
                center: vec![0.5, 0.0],
                radius: 0.05,
            }],
            ..Default::default()
        };
        let s = segment_collision_free(&r, &q(&[0.0, 0.0]), &q(&[1.0, 0.0]), 0.25, &blocked).unwrap();
        assert!(!s.free);
        assert_eq!(s.checks, 3);
    }

    #[test]
    fn segment_check_symmetric() {
        let r = point2();
        let obs = ObstacleSet {
            circles: vec![Circle {
                center: vec![0.3, 0.31],
                radius: 0.2,
            }],
            boxes: vec![AaBox {
                min: vec![-2.0, 1.0],
                max: vec![-1.0, 2.0],
            }],
            margin: 0.0,
        };
        let pts = [[0.0, 0.0], [1.0, 1.0], [-1.5, 0.0], [-1.5, 3.0], [0.6, -0.2]];
        for a in &pts {
            for b in &pts {
                let f = segment_collision_free(&r, &q(a), &q(b), 0.05, &obs).unwrap().free;
                let g = segment_collision_free(&r, &q(b), &q(a), 0.05, &obs).unwrap().free;
                assert_eq!(f, g);
            }
        }
    }

    #[test]
    fn obstacle_order_does_not_matter() {
        let arm = Robot::planar_arm(PlanarArm::new(vec![0.4, 1.6]).unwrap());
        let a = Circle {
            center: vec![1.0, 0.5],
            radius: 0.2,
        };
        let b = Circle {
            center: vec![-0.5, 1.2],
            radius: 0.3,
        };
        let o1 = ObstacleSet {
            circles: vec![a.clone(), b.clone()],
            ..Default::default()
        };
        let o2 = ObstacleSet {
            circles: vec![b, a],
            ..Default::default()
        };
        for i in 0..200 {
            let t = i as f64 * 0.031;
            let c = q(&[t.sin() * 3.0, (t * 1.7).cos() * 3.0]);
            assert_eq!(arm.config_collision(&c, &o1), arm.config_collision(&c, &o2));
        }
    }
}
