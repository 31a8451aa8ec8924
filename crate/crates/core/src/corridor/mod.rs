//! Probabilistically safe corridors: convex polytopes around a configuration
//! bounded by tangent hyperplanes of the per-component confidence ellipsoids
//! of a collision-space mixture.

mod qp;

pub use qp::{project_onto_corridor, project_onto_halfspaces, ActiveSetCache, Projection, KKT_TOL};

use nalgebra::DVector;
use serde::Serialize;

use crate::confidence::ComponentLevels;
use crate::error::{check_dim, Error, Result};
use crate::gmm::GaussianMixture;
use crate::linalg::all_finite;

/// Default safety tolerance used by the planners.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Scale of the fallback direction used when the anchor sits exactly on a
/// component mean.
const DEGENERATE_DIRECTION_SCALE: f64 = 1e-9;

/// One corridor face in centered form: `normal·(x - anchor) ≤ offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: DVector<f64>,
    pub offset: f64,
    pub source_component: usize,
}

/// Intersection of half-spaces around `anchor`.
#[derive(Debug, Clone)]
pub struct SafeCorridor {
    anchor: DVector<f64>,
    halfspaces: Vec<HalfSpace>,
    epsilon: f64,
    kappa: f64,
    // Rows rescaled to unit normals in absolute form `u·x ≤ c`, used by the QP.
    unit_normals: Vec<DVector<f64>>,
    unit_rhs: Vec<f64>,
}

impl SafeCorridor {
    /// Corridor from explicit half-spaces, mainly for tests and tooling.
    pub fn from_halfspaces(anchor: DVector<f64>, halfspaces: Vec<HalfSpace>, epsilon: f64) -> Result<Self> {
        if !all_finite(&anchor) {
            return Err(Error::NonFinite("corridor anchor"));
        }
        let mut unit_normals = Vec::with_capacity(halfspaces.len());
        let mut unit_rhs = Vec::with_capacity(halfspaces.len());
        for h in &halfspaces {
            check_dim(anchor.len(), h.normal.len())?;
            let norm = h.normal.norm();
            if !(norm > 0.0 && norm.is_finite() && h.offset.is_finite()) {
                return Err(Error::NonFinite("half-space normal"));
            }
            unit_normals.push(&h.normal / norm);
            unit_rhs.push((h.normal.dot(&anchor) + h.offset) / norm);
        }
        Ok(SafeCorridor {
            anchor,
            halfspaces,
            epsilon,
            kappa: f64::NAN,
            unit_normals,
            unit_rhs,
        })
    }

    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Overall confidence level of the levels the corridor was built from.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    /// Signed slack `offset - normal·(x - anchor)` of every face.
    pub fn slacks(&self, x: &DVector<f64>) -> Vec<f64> {
        let d = x - &self.anchor;
        self.halfspaces.iter().map(|h| h.offset - h.normal.dot(&d)).collect()
    }

    pub(crate) fn unit_rows(&self) -> (&[DVector<f64>], &[f64]) {
        (&self.unit_normals, &self.unit_rhs)
    }

    /// Debug dump `{anchor, constraints:[{normal, offset}]}` with offsets in
    /// absolute form `normal·x ≤ offset`.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Row {
            normal: Vec<f64>,
            offset: f64,
            source_component: usize,
        }
        #[derive(Serialize)]
        struct Dump {
            anchor: Vec<f64>,
            epsilon: f64,
            constraints: Vec<Row>,
        }
        let dump = Dump {
            anchor: self.anchor.iter().copied().collect(),
            epsilon: self.epsilon,
            constraints: self
                .halfspaces
                .iter()
                .map(|h| Row {
                    normal: h.normal.iter().copied().collect(),
                    offset: h.offset + h.normal.dot(&self.anchor),
                    source_component: h.source_component,
                })
                .collect(),
        };
        serde_json::to_value(dump).expect("corridor dump serializes")
    }
}

/// Builds the corridor around `p`.
///
/// Component `k` with Mahalanobis distance `d_k = ‖Σ_k^{-1/2}(μ_k - p)‖` and
/// radius `r_k = √F⁻¹(κ_k)` contributes
/// `(μ_k - p)ᵀΣ_k⁻¹(x - p) / d_k² ≤ max(1 - r_k/d_k, ε)`.
/// Components clamped to `κ_k = 0` contribute nothing.
pub fn build_corridor(
    p: &DVector<f64>,
    gmm: &GaussianMixture,
    levels: &ComponentLevels,
    epsilon: f64,
) -> Result<SafeCorridor> {
    check_dim(gmm.dim(), p.len())?;
    check_dim(gmm.len(), levels.len())?;
    if !all_finite(p) {
        return Err(Error::NonFinite("corridor anchor"));
    }
    if !epsilon.is_finite() {
        return Err(Error::NonFinite("epsilon"));
    }
    let mut halfspaces = Vec::with_capacity(gmm.len());
    for (k, c) in gmm.components().iter().enumerate() {
        if !levels.is_active(k) {
            continue;
        }
        let mut dir = c.mean() - p;
        if dir.iter().all(|&v| v == 0.0) {
            dir[0] = DEGENERATE_DIRECTION_SCALE;
        }
        let whitened = c.inv_sqrt() * &dir;
        let dist_sq = whitened.norm_squared();
        let dist = dist_sq.sqrt();
        let radius = levels.per_component_radius_sq[k].sqrt();
        let normal = c.inverse() * &dir / dist_sq;
        let offset = (1.0 - radius / dist).max(epsilon);
        halfspaces.push(HalfSpace {
            normal,
            offset,
            source_component: k,
        });
    }
    let mut corridor = SafeCorridor::from_halfspaces(p.clone(), halfspaces, epsilon)?;
    corridor.kappa = levels.overall_level;
    Ok(corridor)
}

/// Inclusive membership test against every face.
pub fn corridor_contains(corridor: &SafeCorridor, x: &DVector<f64>) -> bool {
    x.len() == corridor.dim() && corridor.slacks(x).iter().all(|&s| s >= 0.0)
}
