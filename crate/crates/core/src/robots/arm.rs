use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Largest condition number of `J Jᵀ` accepted by [`jacobian_pinv`].
pub const MAX_JJT_CONDITION: f64 = 1e12;

/// Planar serial chain with revolute joints and cumulative joint angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarArm {
    pub link_lengths: Vec<f64>,
    #[serde(default)]
    pub base: [f64; 2],
}

/// Joint positions of an arm pose, base first and end effector last.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmPose {
    pub joints: Vec<Vector2<f64>>,
}

impl ArmPose {
    pub fn end_effector(&self) -> Vector2<f64> {
        *self.joints.last().expect("pose has at least the base")
    }
}

impl PlanarArm {
    pub fn new(link_lengths: Vec<f64>) -> Result<Self> {
        let arm = PlanarArm {
            link_lengths,
            base: [0.0, 0.0],
        };
        arm.validate()?;
        Ok(arm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.link_lengths.is_empty() {
            return Err(Error::InvalidConfig("arm needs at least one link".into()));
        }
        if self.link_lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidConfig("link lengths must be positive".into()));
        }
        Ok(())
    }

    pub fn dof(&self) -> usize {
        self.link_lengths.len()
    }

    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    /// Joint `i` sits at `base + Σ_{j≤i} L_j (cos θ_j, sin θ_j)` with
    /// `θ_j = Σ_{k≤j} q_k`.
    pub fn forward_kinematics(&self, q: &DVector<f64>) -> Result<ArmPose> {
        check_dim(self.dof(), q.len())?;
        let mut joints = Vec::with_capacity(self.dof() + 1);
        let mut p = Vector2::new(self.base[0], self.base[1]);
        joints.push(p);
        let mut theta = 0.0;
        for (l, qi) in self.link_lengths.iter().zip(q.iter()) {
            theta += qi;
            p += Vector2::new(theta.cos(), theta.sin()) * *l;
            joints.push(p);
        }
        Ok(ArmPose { joints })
    }

    pub fn end_effector(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        let e = self.forward_kinematics(q)?.end_effector();
        Ok(DVector::from_vec(vec![e.x, e.y]))
    }

    /// 2×n positional Jacobian of the end effector.
    pub fn jacobian(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_dim(self.dof(), q.len())?;
        let n = self.dof();
        let mut thetas = Vec::with_capacity(n);
        let mut theta = 0.0;
        for qi in q.iter() {
            theta += qi;
            thetas.push(theta);
        }
        let mut j = DMatrix::zeros(2, n);
        // column c sums the contributions of links c..n
        let (mut sx, mut sy) = (0.0, 0.0);
        for c in (0..n).rev() {
            sx -= self.link_lengths[c] * thetas[c].sin();
            sy += self.link_lengths[c] * thetas[c].cos();
            j[(0, c)] = sx;
            j[(1, c)] = sy;
        }
        Ok(j)
    }
}

/// Right pseudoinverse `Jᵀ(JJᵀ)⁻¹` of a full-row-rank Jacobian.
pub fn jacobian_pinv(j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("jacobian"));
    }
    let jjt = j * j.transpose();
    let eig = jjt.clone().symmetric_eigen();
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if !(lo > 0.0) || hi / lo > MAX_JJT_CONDITION {
        return Err(Error::SingularJacobian);
    }
    let inv = jjt.cholesky().ok_or(Error::SingularJacobian)?.inverse();
    Ok(j.transpose() * inv)
}
