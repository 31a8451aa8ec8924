use nalgebra::{DMatrix, DVector};

use super::tree::{straight_line_steer, Tree};
use super::{PlanStats, PlannerConfig};
use crate::corridor::{build_corridor, project_onto_corridor, ActiveSetCache};
use crate::model::GuideModel;
use crate::robots::{jacobian_pinv, segment_steps, walk_segment, ObstacleSet, PlanarArm, Robot};

/// Counting collision oracle. Optionally records every evaluated
/// configuration with its label.
#[derive(Debug, Clone)]
pub struct CollisionChecker<'a> {
    pub robot: &'a Robot,
    pub obstacles: &'a ObstacleSet,
    pub resolution: f64,
    pub checks: usize,
    record: Option<Vec<(DVector<f64>, bool)>>,
}

impl<'a> CollisionChecker<'a> {
    pub fn new(robot: &'a Robot, obstacles: &'a ObstacleSet, resolution: f64) -> Self {
        CollisionChecker {
            robot,
            obstacles,
            resolution,
            checks: 0,
            record: None,
        }
    }

    pub fn recording(mut self) -> Self {
        self.record = Some(Vec::new());
        self
    }

    pub fn take_record(&mut self) -> Vec<(DVector<f64>, bool)> {
        self.record.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn collides(&mut self, q: &DVector<f64>) -> bool {
        self.checks += 1;
        let hit = self.robot.config_collision(q, self.obstacles);
        if let Some(r) = self.record.as_mut() {
            r.push((q.clone(), hit));
        }
        hit
    }

    /// Checks every interpolated configuration of `a→b`, endpoints included.
    pub fn segment_free(&mut self, a: &DVector<f64>, b: &DVector<f64>) -> bool {
        let resolution = self.resolution;
        walk_segment(a, b, resolution, |q| self.collides(q)).free
    }

    /// Like [`segment_free`](Self::segment_free) but trusts `a`, which is
    /// already a verified tree node.
    pub fn extension_free(&mut self, a: &DVector<f64>, b: &DVector<f64>) -> bool {
        let steps = segment_steps((b - a).norm(), self.resolution);
        (1..=steps).all(|i| {
            let q = if i == steps {
                b.clone()
            } else {
                a + (b - a) * (i as f64 / steps as f64)
            };
            !self.collides(&q)
        })
    }
}

/// How the extension target is chosen from a random sample.
#[derive(Debug, Clone, Copy)]
pub enum Steering<'a> {
    /// Straight toward the sample.
    Straight,
    /// Toward the projection of the sample onto the corridor around the
    /// nearest node, in configuration space.
    Config(&'a GuideModel),
    /// Corridor projection in end-effector space, mapped back through the
    /// Jacobian pseudoinverse.
    Task { arm: &'a PlanarArm, model: &'a GuideModel },
}

/// Mutable state shared by successive extensions of one planner run.
#[derive(Debug)]
pub struct ExtendContext<'a> {
    pub checker: CollisionChecker<'a>,
    pub config: &'a PlannerConfig,
    pub cache: ActiveSetCache,
    pub stats: PlanStats,
}

impl<'a> ExtendContext<'a> {
    pub fn new(checker: CollisionChecker<'a>, config: &'a PlannerConfig) -> Self {
        ExtendContext {
            checker,
            config,
            cache: ActiveSetCache::new(),
            stats: PlanStats::default(),
        }
    }

    pub fn budget_left(&self) -> bool {
        self.stats.extensions < self.config.budget
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtendOutcome {
    /// Nodes added, in order.
    pub added: Vec<usize>,
    /// First added node within `d_min` of the watched configuration.
    pub reached: Option<usize>,
    /// The last attempted segment collided.
    pub collided: bool,
}

/// Chained extension toward one sample: up to `max_iter` steps, each from
/// the node nearest `q_rand`, stopping on collision, zero progress, a
/// skipped step or reaching `watch`.
pub fn extend(
    ctx: &mut ExtendContext<'_>,
    tree: &mut Tree,
    q_rand: &DVector<f64>,
    steering: Steering<'_>,
    watch: Option<&DVector<f64>>,
) -> ExtendOutcome {
    let mut out = ExtendOutcome::default();
    for _ in 0..ctx.config.max_iter {
        if !ctx.budget_left() {
            break;
        }
        let near = tree.nearest(q_rand);
        let q_near = tree.node(near).clone();
        let step = match steering {
            Steering::Straight => Some(straight_line_steer(&q_near, q_rand, ctx.config.delta)),
            Steering::Config(model) => config_step(ctx, &q_near, q_rand, model),
            Steering::Task { arm, model } => task_step(ctx, &q_near, q_rand, arm, model),
        };
        let Some(q_adj) = step else {
            break;
        };
        if q_adj == q_near {
            break;
        }
        ctx.stats.extensions += 1;
        if !ctx.checker.extension_free(&q_near, &q_adj) {
            ctx.stats.colliding_extensions += 1;
            out.collided = true;
            break;
        }
        let idx = tree.add(q_adj, near);
        if let Steering::Task { arm, .. } = steering {
            if let Ok(x) = arm.end_effector(tree.node(idx)) {
                tree.set_end_effector(idx, x);
            }
        }
        out.added.push(idx);
        if let Some(w) = watch {
            if (tree.node(idx) - w).norm() <= ctx.config.d_min {
                out.reached = Some(idx);
                break;
            }
        }
    }
    out
}

fn config_step(
    ctx: &mut ExtendContext<'_>,
    q_near: &DVector<f64>,
    q_rand: &DVector<f64>,
    model: &GuideModel,
) -> Option<DVector<f64>> {
    let target = match guide_target(ctx, q_near, q_rand, model) {
        Some(t) => t,
        None => {
            ctx.stats.skipped_extensions += 1;
            return None;
        }
    };
    Some(straight_line_steer(q_near, &target, ctx.config.delta))
}

/// Projection of `target` onto the corridor around `anchor`.
fn guide_target(
    ctx: &mut ExtendContext<'_>,
    anchor: &DVector<f64>,
    target: &DVector<f64>,
    model: &GuideModel,
) -> Option<DVector<f64>> {
    ctx.stats.corridor_builds += 1;
    let projected = build_corridor(anchor, &model.gmm, &model.levels, ctx.config.epsilon)
        .and_then(|c| project_onto_corridor(&c, target, &mut ctx.cache));
    match projected {
        Ok(p) => {
            ctx.stats.projection_iterations += p.iterations;
            Some(p.point)
        }
        Err(_) => {
            ctx.stats.projection_failures += 1;
            ctx.cache.invalidate();
            None
        }
    }
}

fn task_step(
    ctx: &mut ExtendContext<'_>,
    q_near: &DVector<f64>,
    q_rand: &DVector<f64>,
    arm: &PlanarArm,
    model: &GuideModel,
) -> Option<DVector<f64>> {
    let q_new = straight_line_steer(q_near, q_rand, ctx.config.delta);
    if &q_new == q_near {
        return Some(q_new);
    }
    let fk = |q: &DVector<f64>| arm.end_effector(q).ok();
    let (Some(x_rand), Some(x_near), Some(x_new)) = (fk(q_rand), fk(q_near), fk(&q_new)) else {
        ctx.stats.skipped_extensions += 1;
        return None;
    };
    let Some(x_proj) = guide_target(ctx, &x_near, &x_rand, model) else {
        ctx.stats.skipped_extensions += 1;
        return None;
    };
    let dir = &x_proj - &x_near;
    let dir_norm = dir.norm();
    let step_len = (&x_new - &x_near).norm();
    if !(dir_norm > 0.0) || !(step_len > 0.0) {
        ctx.stats.skipped_extensions += 1;
        return None;
    }
    let dx = dir * (step_len / dir_norm);
    let err = (dx.norm() - step_len).abs();
    ctx.stats.max_step_norm_error = ctx.stats.max_step_norm_error.max(err);

    let j = arm.jacobian(q_near).ok()?;
    ctx.stats.pinv_calls += 1;
    let pinv = match jacobian_pinv(&j) {
        Ok(p) => p,
        Err(_) => {
            ctx.stats.skipped_extensions += 1;
            return None;
        }
    };
    let residual = (&j * &pinv * &j - &j).amax();
    ctx.stats.max_pinv_residual = ctx.stats.max_pinv_residual.max(residual);
    let n = q_near.len();
    let null = DMatrix::identity(n, n) - &pinv * &j;
    let mut dq = &pinv * dx + null * (&q_new - q_near);
    let dq_norm = dq.norm();
    if dq_norm > ctx.config.delta {
        dq *= ctx.config.delta / dq_norm;
    }
    Some(q_near + dq)
}

/// One corridor-guided configuration-space extension toward `q_rand`.
pub fn sg_extend_config(
    ctx: &mut ExtendContext<'_>,
    tree: &mut Tree,
    q_rand: &DVector<f64>,
    model: &GuideModel,
) -> ExtendOutcome {
    extend(ctx, tree, q_rand, Steering::Config(model), None)
}

/// One task-space extension toward `q_rand`.
pub fn sg_extend_task(
    ctx: &mut ExtendContext<'_>,
    tree: &mut Tree,
    q_rand: &DVector<f64>,
    arm: &PlanarArm,
    model: &GuideModel,
) -> ExtendOutcome {
    extend(ctx, tree, q_rand, Steering::Task { arm, model }, None)
}
