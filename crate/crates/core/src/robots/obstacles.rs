use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Axis-aligned box given by its min and max corners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AaBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Circles (balls in higher dimensions) and axis-aligned boxes, optionally
/// inflated by `margin`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSet {
    #[serde(default)]
    pub circles: Vec<Circle>,
    #[serde(default)]
    pub boxes: Vec<AaBox>,
    #[serde(default)]
    pub margin: f64,
}

impl ObstacleSet {
    pub fn is_empty(&self) -> bool {
        self.circles.is_empty() && self.boxes.is_empty()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        for c in &self.circles {
            if c.center.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: c.center.len(),
                });
            }
            if !(c.radius > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "circle radius {} must be positive",
                    c.radius
                )));
            }
        }
        for b in &self.boxes {
            if b.min.len() != dim || b.max.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: b.min.len().min(b.max.len()),
                });
            }
            if b.min.iter().zip(&b.max).any(|(lo, hi)| !(lo < hi)) {
                return Err(Error::InvalidConfig("box min must be below max".into()));
            }
        }
        if !(self.margin >= 0.0) {
            return Err(Error::InvalidConfig("margin must be non-negative".into()));
        }
        Ok(())
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        let m = self.margin;
        self.circles.iter().any(|c| {
            let r = c.radius + m;
            dist_sq(&c.center, x) <= r * r
        }) || self.boxes.iter().any(|b| {
            x.iter()
                .enumerate()
                .all(|(i, &v)| v >= b.min[i] - m && v <= b.max[i] + m)
        })
    }

    /// Exact test of the closed segment `a→b` against every obstacle.
    pub fn intersects_segment(&self, a: &[f64], b: &[f64]) -> bool {
        let m = self.margin;
        self.circles.iter().any(|c| {
            let r = c.radius + m;
            segment_point_dist_sq(a, b, &c.center) <= r * r
        }) || self.boxes.iter().any(|bx| segment_hits_box(a, b, bx, m))
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn segment_point_dist_sq(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let mut ab2 = 0.0;
    let mut dot = 0.0;
    for i in 0..a.len() {
        let d = b[i] - a[i];
        ab2 += d * d;
        dot += (p[i] - a[i]) * d;
    }
    let t = if ab2 > 0.0 { (dot / ab2).clamp(0.0, 1.0) } else { 0.0 };
    (0..a.len())
        .map(|i| {
            let c = a[i] + t * (b[i] - a[i]) - p[i];
            c * c
        })
        .sum()
}

/// Slab clipping of the parametric segment against the inflated box.
fn segment_hits_box(a: &[f64], b: &[f64], bx: &AaBox, margin: f64) -> bool {
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for i in 0..a.len() {
        let lo = bx.min[i] - margin;
        let hi = bx.max[i] + margin;
        let d = b[i] - a[i];
        if d == 0.0 {
            if a[i] < lo || a[i] > hi {
                return false;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo - a[i]) / d, (hi - a[i]) / d);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}
