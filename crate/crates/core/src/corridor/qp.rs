//! Metric projection onto a corridor: `min ½‖x - t‖²  s.t.  u_iᵀx ≤ c_i`.
//!
//! The main solver is a primal active-set method started from the corridor
//! anchor, which is feasible whenever `ε ≥ 0`. A cached working set from the
//! previous projection of the same target is tried first. Whatever path
//! finds the optimal active set, the returned point is recomputed from that
//! set in sorted order, so warm and cold solves agree bit for bit.

use nalgebra::{DMatrix, DVector};

use super::SafeCorridor;
use crate::error::{check_dim, Error, Result};

/// Maximum KKT residual accepted at return.
pub const KKT_TOL: f64 = 1e-8;

const FEAS_TOL: f64 = 1e-10;
const STEP_TOL: f64 = 1e-13;
const DIR_TOL: f64 = 1e-14;

/// Working set reused across projections of one target.
#[derive(Debug, Clone, Default)]
pub struct ActiveSetCache {
    /// Source-component ids of the faces active at the last solution.
    pub last_active: Vec<usize>,
    pub last_target: Option<DVector<f64>>,
    pub valid_for_target: bool,
    pub hits: usize,
    pub misses: usize,
}

impl ActiveSetCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn invalidate(&mut self) {
        self.last_active.clear();
        self.last_target = None;
        self.valid_for_target = false;
    }

    fn usable_for(&self, target: &DVector<f64>) -> bool {
        self.valid_for_target && self.last_target.as_ref() == Some(target)
    }
}

/// Projection result.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: DVector<f64>,
    /// Indices (into the corridor's faces) of the active constraints, sorted.
    pub active: Vec<usize>,
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    pub warm_started: bool,
    pub kkt_residual: f64,
}

/// Projects `target` onto `corridor`, warm-starting from `cache` when it was
/// last used for the same target.
pub fn project_onto_corridor(
    corridor: &SafeCorridor,
    target: &DVector<f64>,
    cache: &mut ActiveSetCache,
) -> Result<Projection> {
    check_dim(corridor.dim(), target.len())?;
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("projection target"));
    }
    let (normals, rhs) = corridor.unit_rows();
    let warm: Option<Vec<usize>> = if cache.usable_for(target) {
        let ids = &cache.last_active;
        Some(
            corridor
                .halfspaces()
                .iter()
                .enumerate()
                .filter(|(_, h)| ids.contains(&h.source_component))
                .map(|(i, _)| i)
                .collect(),
        )
    } else {
        None
    };
    let result = solve(normals, rhs, corridor.anchor(), target, warm.as_deref())?;
    if result.warm_started {
        cache.hits += 1;
    } else if warm.is_some() {
        cache.misses += 1;
    }
    cache.last_active = result
        .active
        .iter()
        .map(|&i| corridor.halfspaces()[i].source_component)
        .collect();
    cache.last_target = Some(target.clone());
    cache.valid_for_target = true;
    Ok(result)
}

/// Projection onto `{x : normals[i]·x ≤ rhs[i]}` starting from `start`,
/// which should be feasible; an infeasible start falls back to a dual
/// active-set solve that also detects an empty polytope.
pub fn project_onto_halfspaces(
    normals: &[DVector<f64>],
    rhs: &[f64],
    start: &DVector<f64>,
    target: &DVector<f64>,
    warm: Option<&[usize]>,
) -> Result<Projection> {
    let mut unit = Vec::with_capacity(normals.len());
    let mut b = Vec::with_capacity(rhs.len());
    for (n, &c) in normals.iter().zip(rhs) {
        let norm = n.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonFinite("half-space normal"));
        }
        unit.push(n / norm);
        b.push(c / norm);
    }
    solve(&unit, &b, start, target, warm)
}

fn iteration_cap(k: usize) -> usize {
    10 * k + 20
}

fn solve(
    normals: &[DVector<f64>],
    rhs: &[f64],
    start: &DVector<f64>,
    target: &DVector<f64>,
    warm: Option<&[usize]>,
) -> Result<Projection> {
    let k = normals.len();
    if k == 0 || max_violation(normals, rhs, target) <= FEAS_TOL {
        return finalize(normals, rhs, target, Vec::new(), 0, false);
    }

    if let Some(ws) = warm.filter(|w| !w.is_empty()) {
        let mut ws = ws.to_vec();
        ws.sort_unstable();
        if let Some((x, lambda)) = equality_solution(normals, rhs, target, &ws) {
            if max_violation(normals, rhs, &x) <= FEAS_TOL {
                if lambda.iter().all(|&l| l >= 0.0) {
                    return finalize(normals, rhs, target, ws, 0, true);
                }
                let (set, iters) = primal(normals, rhs, target, x, ws)?;
                return finalize(normals, rhs, target, set, iters, true);
            }
        }
    }

    if max_violation(normals, rhs, start) <= FEAS_TOL {
        let (set, iters) = primal(normals, rhs, target, start.clone(), Vec::new())?;
        finalize(normals, rhs, target, set, iters, false)
    } else {
        let (set, iters) = dual(normals, rhs, target)?;
        finalize(normals, rhs, target, set, iters, false)
    }
}

fn max_violation(normals: &[DVector<f64>], rhs: &[f64], x: &DVector<f64>) -> f64 {
    normals
        .iter()
        .zip(rhs)
        .map(|(n, &b)| n.dot(x) - b)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Minimizer of `½‖x - t‖²` on `{n_i·x = b_i, i ∈ set}` and its multipliers:
/// `(N Nᵀ) λ = N t - b`, `x = t - Nᵀ λ`. `None` when `N Nᵀ` is singular.
fn equality_solution(
    normals: &[DVector<f64>],
    rhs: &[f64],
    target: &DVector<f64>,
    set: &[usize],
) -> Option<(DVector<f64>, DVector<f64>)> {
    let m = set.len();
    if m == 0 {
        return Some((target.clone(), DVector::zeros(0)));
    }
    let gram = DMatrix::from_fn(m, m, |i, j| normals[set[i]].dot(&normals[set[j]]));
    let resid = DVector::from_fn(m, |i, _| normals[set[i]].dot(target) - rhs[set[i]]);
    let chol = gram.cholesky()?;
    let lambda = chol.solve(&resid);
    if lambda.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut x = target.clone();
    for (i, &row) in set.iter().enumerate() {
        x.axpy(-lambda[i], &normals[row], 1.0);
    }
    Some((x, lambda))
}

fn primal(
    normals: &[DVector<f64>],
    rhs: &[f64],
    target: &DVector<f64>,
    mut x: DVector<f64>,
    mut set: Vec<usize>,
) -> Result<(Vec<usize>, usize)> {
    let cap = iteration_cap(normals.len());
    for iter in 1..=cap {
        let (x_eq, lambda) = equality_solution(normals, rhs, target, &set).ok_or(Error::ProjectionNonconvergent)?;
        let step = &x_eq - &x;
        if step.norm() <= STEP_TOL * (1.0 + x.norm()) {
            // most negative multiplier leaves; ties go to the lowest face index
            let mut leave: Option<(usize, f64)> = None;
            for (pos, &l) in lambda.iter().enumerate() {
                if l < 0.0 {
                    let better = match leave {
                        None => true,
                        Some((p, best)) => l < best || (l == best && set[pos] < set[p]),
                    };
                    if better {
                        leave = Some((pos, l));
                    }
                }
            }
            match leave {
                None => return Ok((set, iter)),
                Some((pos, _)) => {
                    set.remove(pos);
                }
            }
            continue;
        }
        let mut alpha = 1.0;
        let mut blocking = None;
        for (i, (n, &b)) in normals.iter().zip(rhs).enumerate() {
            if set.contains(&i) {
                continue;
            }
            let rate = n.dot(&step);
            if rate > DIR_TOL {
                let ratio = ((b - n.dot(&x)) / rate).max(0.0);
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(i);
                }
            }
        }
        if blocking.is_none() {
            x = x_eq;
        } else {
            x.axpy(alpha, &step, 1.0);
        }
        if let Some(i) = blocking {
            set.push(i);
            set.sort_unstable();
        }
    }
    Err(Error::ProjectionNonconvergent)
}

/// Goldfarb–Idnani dual active-set iteration specialised to an identity
/// Hessian. Starts at the unconstrained minimizer and adds the most violated
/// face until feasible; reports an empty polytope when a violated face can
/// be neither reached nor traded for an active one.
fn dual(normals: &[DVector<f64>], rhs: &[f64], target: &DVector<f64>) -> Result<(Vec<usize>, usize)> {
    let cap = iteration_cap(normals.len());
    let mut x = target.clone();
    let mut set: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let mut iters = 0;
    loop {
        let mut enter = None;
        let mut worst = FEAS_TOL;
        for (i, (n, &b)) in normals.iter().zip(rhs).enumerate() {
            if set.contains(&i) {
                continue;
            }
            let v = n.dot(&x) - b;
            if v > worst {
                worst = v;
                enter = Some(i);
            }
        }
        let Some(p) = enter else {
            let mut order: Vec<usize> = (0..set.len()).collect();
            order.sort_by_key(|&i| set[i]);
            return Ok((order.iter().map(|&i| set[i]).collect(), iters));
        };
        let mut u_p = 0.0;
        loop {
            iters += 1;
            if iters > cap {
                return Err(Error::ProjectionNonconvergent);
            }
            let a_p = &normals[p];
            let (z, r) = if set.is_empty() {
                (-a_p.clone(), DVector::zeros(0))
            } else {
                let m = set.len();
                let gram = DMatrix::from_fn(m, m, |i, j| normals[set[i]].dot(&normals[set[j]]));
                let na = DVector::from_fn(m, |i, _| normals[set[i]].dot(a_p));
                let r = gram.cholesky().ok_or(Error::ProjectionNonconvergent)?.solve(&na);
                let mut z = -a_p.clone();
                for (i, &row) in set.iter().enumerate() {
                    z.axpy(r[i], &normals[row], 1.0);
                }
                (z, r)
            };
            let mut partial = f64::INFINITY;
            let mut drop = None;
            for (i, &ri) in r.iter().enumerate() {
                if ri > 0.0 {
                    let s = u[i] / ri;
                    if s < partial {
                        partial = s;
                        drop = Some(i);
                    }
                }
            }
            let zz = z.norm_squared();
            let full = if zz > DIR_TOL * DIR_TOL {
                (a_p.dot(&x) - rhs[p]) / zz
            } else {
                f64::INFINITY
            };
            if !full.is_finite() && !partial.is_finite() {
                return Err(Error::EmptyCorridor);
            }
            let s = full.min(partial);
            x.axpy(s, &z, 1.0);
            for (ui, ri) in u.iter_mut().zip(r.iter()) {
                *ui -= s * ri;
            }
            u_p += s;
            if full <= partial {
                set.push(p);
                u.push(u_p);
                break;
            }
            let d = drop.expect("partial step has a blocking face");
            set.remove(d);
            u.remove(d);
        }
    }
}

fn finalize(
    normals: &[DVector<f64>],
    rhs: &[f64],
    target: &DVector<f64>,
    mut set: Vec<usize>,
    iterations: usize,
    warm_started: bool,
) -> Result<Projection> {
    set.sort_unstable();
    let (mut x, mut lambda) = equality_solution(normals, rhs, target, &set).ok_or(Error::ProjectionNonconvergent)?;
    // zero-multiplier faces do not move the solution; drop them so every
    // route reports the same canonical set
    if lambda.iter().any(|&l| l <= 0.0) {
        set = set
            .iter()
            .zip(lambda.iter())
            .filter(|(_, &l)| l > 0.0)
            .map(|(&i, _)| i)
            .collect();
        let (x2, l2) = equality_solution(normals, rhs, target, &set).ok_or(Error::ProjectionNonconvergent)?;
        x = x2;
        lambda = l2;
    }
    let kkt = kkt_residual(normals, rhs, target, &x, &set, &lambda);
    if kkt > KKT_TOL {
        return Err(Error::ProjectionNonconvergent);
    }
    Ok(Projection {
        point: x,
        active: set,
        multipliers: lambda.iter().copied().collect(),
        iterations,
        warm_started,
        kkt_residual: kkt,
    })
}

fn kkt_residual(
    normals: &[DVector<f64>],
    rhs: &[f64],
    target: &DVector<f64>,
    x: &DVector<f64>,
    set: &[usize],
    lambda: &DVector<f64>,
) -> f64 {
    let mut grad = x - target;
    for (i, &row) in set.iter().enumerate() {
        grad.axpy(lambda[i], &normals[row], 1.0);
    }
    let stationarity = grad.amax();
    let primal = max_violation(normals, rhs, x).max(0.0);
    let dual = lambda.iter().fold(0.0f64, |m, &l| m.max(-l));
    let complementarity = set
        .iter()
        .enumerate()
        .map(|(i, &row)| (lambda[i] * (normals[row].dot(x) - rhs[row])).abs())
        .fold(0.0, f64::max);
    stationarity.max(primal).max(dual).max(complementarity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corridor::{corridor_contains, HalfSpace};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    fn box_corridor() -> SafeCorridor {
        // x₁ ≤ 1, x₂ ≤ 1 around the origin
        SafeCorridor::from_halfspaces(
            v(&[0.0, 0.0]),
            vec![
                HalfSpace {
                    normal: v(&[1.0, 0.0]),
                    offset: 1.0,
                    source_component: 0,
                },
                HalfSpace {
                    normal: v(&[0.0, 1.0]),
                    offset: 1.0,
                    source_component: 1,
                },
            ],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn interior_target_is_fixed() {
        let c = box_corridor();
        let t = v(&[0.3, -4.0]);
        let p = project_onto_corridor(&c, &t, &mut ActiveSetCache::new()).unwrap();
        assert_eq!(p.point, t);
        assert!(p.active.is_empty());
    }

    #[test]
    fn single_halfspace_closed_form() {
        // x₁ ≥ 2 written as -x₁ ≤ -2 around anchor (4, 0)
        let c = SafeCorridor::from_halfspaces(
            v(&[4.0, 0.0]),
            vec![HalfSpace {
                normal: v(&[-0.25, 0.0]),
                offset: 0.5,
                source_component: 0,
            }],
            0.0,
        )
        .unwrap();
        let t = v(&[0.0, 0.0]);
        let p = project_onto_corridor(&c, &t, &mut ActiveSetCache::new()).unwrap();
        // t + (b - aᵀt)/‖a‖² a with a = (-1, 0), b = -2
        let a = v(&[-1.0, 0.0]);
        let expected = &t + &a * ((-2.0 - a.dot(&t)) / a.norm_squared());
        assert!((p.point - expected).norm() < 1e-14);
        assert_eq!(p.active, vec![0]);
    }

    #[test]
    fn corner_projection_activates_both() {
        let c = box_corridor();
        let p = project_onto_corridor(&c, &v(&[2.0, 2.0]), &mut ActiveSetCache::new()).unwrap();
        assert!((p.point - v(&[1.0, 1.0])).norm() < 1e-14);
        assert_eq!(p.active, vec![0, 1]);
        assert!(p.kkt_residual <= KKT_TOL);
    }

    #[test]
    fn warm_start_reuses_active_set() {
        let c = box_corridor();
        let t = v(&[2.0, 3.0]);
        let mut cache = ActiveSetCache::new();
        let cold = project_onto_corridor(&c, &t, &mut cache).unwrap();
        let warm = project_onto_corridor(&c, &t, &mut cache).unwrap();
        assert!(warm.warm_started);
        assert_eq!(warm.iterations, 0);
        assert_eq!(cold.point, warm.point);
        let other = project_onto_corridor(&c, &v(&[5.0, 0.0]), &mut cache).unwrap();
        assert!(!other.warm_started);
    }

    #[test]
    fn empty_polytope_detected() {
        // x₁ ≤ -1 and x₁ ≥ 1, anchor infeasible
        let c = SafeCorridor::from_halfspaces(
            v(&[0.0]),
            vec![
                HalfSpace {
                    normal: v(&[1.0]),
                    offset: -1.0,
                    source_component: 0,
                },
                HalfSpace {
                    normal: v(&[-1.0]),
                    offset: -1.0,
                    source_component: 1,
                },
            ],
            -1.0,
        )
        .unwrap();
        let r = project_onto_corridor(&c, &v(&[0.5]), &mut ActiveSetCache::new());
        assert!(matches!(r, Err(Error::EmptyCorridor)));
    }

    #[test]
    fn infeasible_anchor_uses_dual_route() {
        // x₁ ≥ 1 with anchor at the origin, nonempty
        let c = SafeCorridor::from_halfspaces(
            v(&[0.0, 0.0]),
            vec![
                HalfSpace {
                    normal: v(&[-1.0, 0.0]),
                    offset: -1.0,
                    source_component: 0,
                },
                HalfSpace {
                    normal: v(&[0.0, 1.0]),
                    offset: 2.0,
                    source_component: 1,
                },
            ],
            -0.5,
        )
        .unwrap();
        let p = project_onto_corridor(&c, &v(&[-3.0, 5.0]), &mut ActiveSetCache::new()).unwrap();
        assert!((&p.point - v(&[1.0, 2.0])).norm() < 1e-12);
        assert!(corridor_contains(&c, &(&p.point + v(&[1e-12, -1e-12]))));
    }
}
