use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{default_joint_limits, JointLimits, ObstacleSet, Robot, RobotKind};
use crate::error::{Error, Result};
use crate::planners::PlannerConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RobotFile {
    #[serde(flatten)]
    kind: RobotKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    joint_limits: Option<JointLimits>,
}

/// On-disk scenario document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    robot: RobotFile,
    #[serde(default)]
    pub obstacles: ObstacleSet,
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
    #[serde(default)]
    pub planner: PlannerConfig,
}

/// Validated planning problem.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub robot: Robot,
    pub obstacles: ObstacleSet,
    pub start: DVector<f64>,
    pub goal: DVector<f64>,
    pub planner: PlannerConfig,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        robot: Robot,
        obstacles: ObstacleSet,
        start: DVector<f64>,
        goal: DVector<f64>,
        planner: PlannerConfig,
    ) -> Result<Self> {
        let s = Scenario {
            name: name.into(),
            robot,
            obstacles,
            start,
            goal,
            planner,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let n = self.robot.dim();
        if let RobotKind::PlanarArm(a) = &self.robot.kind {
            a.validate()?;
        }
        if n == 0 {
            return Err(Error::InvalidConfig("robot has no degrees of freedom".into()));
        }
        if self.robot.joint_limits.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.robot.joint_limits.len(),
            });
        }
        if self.robot.joint_limits.iter().any(|[lo, hi]| !(lo < hi)) {
            return Err(Error::InvalidConfig("joint limit intervals must be nonempty".into()));
        }
        self.obstacles.validate(self.robot.workspace_dim())?;
        for (what, q) in [("start", &self.start), ("goal", &self.goal)] {
            if q.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: q.len(),
                });
            }
            if !self.robot.within_limits(q) {
                return Err(Error::InvalidConfig(format!("{what} violates joint limits")));
            }
        }
        self.planner.validate()
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let limits = match (&file.robot.kind, file.robot.joint_limits) {
            (_, Some(l)) => l,
            (RobotKind::PlanarArm(a), None) => default_joint_limits(a.dof()),
            (RobotKind::Point(_), None) => return Err(Error::InvalidConfig("point robot needs joint_limits".into())),
        };
        Scenario::new(
            file.name,
            Robot {
                kind: file.robot.kind,
                joint_limits: limits,
            },
            file.obstacles,
            DVector::from_vec(file.start),
            DVector::from_vec(file.goal),
            file.planner,
        )
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            name: self.name.clone(),
            robot: RobotFile {
                kind: self.robot.kind.clone(),
                joint_limits: Some(self.robot.joint_limits.clone()),
            },
            obstacles: self.obstacles.clone(),
            start: self.start.iter().copied().collect(),
            goal: self.goal.iter().copied().collect(),
            planner: self.planner.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        let mut s = Self::from_json(&text)?;
        if s.name.is_empty() {
            s.name = path
                .as_ref()
                .file_stem()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}
