//! Sampling-based planners: RRT, goal-biased RRT, RRT-Connect, the
//! corridor-guided extensions in configuration and task space, GMM-biased
//! sampling and PRM.

mod extend;
mod prm;
mod rrt;
mod sampling;
mod tree;

pub use extend::{extend, sg_extend_config, sg_extend_task, CollisionChecker, ExtendContext, ExtendOutcome, Steering};
pub use prm::{local_connect, prm_build, LocalConnect, LocalPlanner, Roadmap, RoadmapEdge};
pub use rrt::{plan, plan_with_checker, PlanResult};
pub use sampling::{gmm_biased_sample, uniform_sample};
pub use tree::{nearest_neighbor, straight_line_steer, Tree};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Rrt,
    #[serde(alias = "rrt_biased")]
    RrtBiased,
    #[serde(alias = "rrt_connect")]
    RrtConnect,
    #[serde(alias = "sg_rrt")]
    SgRrt,
    #[serde(alias = "sg_rrt_connect")]
    SgRrtConnect,
    #[serde(alias = "ws_sg_rrt")]
    WsSgRrt,
    #[serde(alias = "gmm_sg_rrt")]
    GmmSgRrt,
    #[serde(alias = "gmm_ws_sg_rrt")]
    GmmWsSgRrt,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Rrt,
        Variant::RrtBiased,
        Variant::RrtConnect,
        Variant::SgRrt,
        Variant::SgRrtConnect,
        Variant::WsSgRrt,
        Variant::GmmSgRrt,
        Variant::GmmWsSgRrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Rrt => "rrt",
            Variant::RrtBiased => "rrt-biased",
            Variant::RrtConnect => "rrt-connect",
            Variant::SgRrt => "sg-rrt",
            Variant::SgRrtConnect => "sg-rrt-connect",
            Variant::WsSgRrt => "ws-sg-rrt",
            Variant::GmmSgRrt => "gmm-sg-rrt",
            Variant::GmmWsSgRrt => "gmm-ws-sg-rrt",
        }
    }

    pub fn uses_collision_model(self) -> bool {
        matches!(self, Variant::SgRrt | Variant::SgRrtConnect | Variant::GmmSgRrt)
    }

    pub fn uses_workspace_model(self) -> bool {
        matches!(self, Variant::WsSgRrt | Variant::GmmWsSgRrt)
    }

    pub fn uses_free_model(self) -> bool {
        matches!(self, Variant::GmmSgRrt | Variant::GmmWsSgRrt)
    }

    pub fn is_bidirectional(self) -> bool {
        matches!(self, Variant::RrtConnect | Variant::SgRrtConnect)
    }

    pub fn needs_model(self) -> bool {
        self.uses_collision_model() || self.uses_workspace_model() || self.uses_free_model()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown variant '{s}'")))
    }
}

/// Planner parameters. Every field has a default so scenario files may
/// override only what they need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub variant: Variant,
    /// Steering step δ.
    pub delta: f64,
    /// Goal threshold.
    pub d_min: f64,
    /// How many chained extensions one random sample may drive.
    pub max_iter: usize,
    /// Probability of sampling the goal. Absent means 0.1 for `rrt-biased`
    /// and 0 for everything else.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal_bias: Option<f64>,
    pub kappa: f64,
    pub epsilon: f64,
    /// Collision-check spacing along segments.
    pub resolution: f64,
    /// Maximum number of extensions (tree edges attempted).
    pub budget: usize,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            variant: Variant::Rrt,
            delta: 0.1,
            d_min: 0.1,
            max_iter: 3,
            goal_bias: None,
            kappa: 0.9,
            epsilon: crate::corridor::DEFAULT_EPSILON,
            resolution: 0.05,
            budget: 20_000,
            seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta must be positive");
        }
        if !(self.d_min > 0.0 && self.d_min.is_finite()) {
            return bad("d_min must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return bad("resolution must be positive");
        }
        if let Some(b) = self.goal_bias {
            if !(0.0..1.0).contains(&b) {
                return bad("goal_bias must lie in [0, 1)");
            }
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad("kappa must lie in (0, 1)");
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be non-negative");
        }
        Ok(())
    }

    pub fn effective_goal_bias(&self) -> f64 {
        match (self.goal_bias, self.variant) {
            (Some(b), _) => b,
            (None, Variant::RrtBiased) => 0.1,
            (None, _) => 0.0,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Exact event counts for one planning run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    /// Random samples drawn.
    pub samples: usize,
    /// Extension attempts that reached the segment check.
    pub extensions: usize,
    /// Configuration-level collision predicate evaluations.
    pub collision_checks: usize,
    /// Extensions whose segment check failed.
    pub colliding_extensions: usize,
    pub corridor_builds: usize,
    pub projection_iterations: usize,
    pub projection_failures: usize,
    /// Extensions abandoned before the segment check (failed projection,
    /// zero direction, singular Jacobian).
    pub skipped_extensions: usize,
    pub pinv_calls: usize,
    /// Largest `|‖ΔX_adj‖ - ‖X_new - X_near‖|` seen by task-space steering.
    pub max_step_norm_error: f64,
    /// Largest `max|J J† J - J|` over successful pseudoinverse calls.
    pub max_pinv_residual: f64,
    pub tree_nodes: usize,
    pub wall_time_ms: f64,
}

impl PlanStats {
    pub fn colliding_fraction(&self) -> f64 {
        if self.extensions == 0 {
            0.0
        } else {
            self.colliding_extensions as f64 / self.extensions as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
            let json = serde_json::to_string(&v).unwrap();
            assert_eq!(serde_json::from_str::<Variant>(&json).unwrap(), v);
        }
        assert_eq!("sg_rrt".parse::<Variant>().unwrap(), Variant::SgRrt);
        assert_eq!(
            serde_json::from_str::<Variant>("\"gmm_ws_sg_rrt\"").unwrap(),
            Variant::GmmWsSgRrt
        );
        assert!("rrt*".parse::<Variant>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PlannerConfig::default().validate().is_ok());
        let c = PlannerConfig {
            max_iter: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = PlannerConfig {
            goal_bias: Some(1.0),
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = PlannerConfig {
            delta: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn goal_bias_defaults() {
        let c = PlannerConfig::default();
        assert_eq!(c.effective_goal_bias(), 0.0);
        assert_eq!(c.clone().with_variant(Variant::RrtBiased).effective_goal_bias(), 0.1);
        let c = PlannerConfig {
            goal_bias: Some(0.3),
            ..c
        };
        assert_eq!(c.effective_goal_bias(), 0.3);
    }
}
