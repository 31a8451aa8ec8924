use std::collections::BTreeSet;

use nalgebra::DVector;
use rand::Rng;

use super::extend::{CollisionChecker, ExtendContext, Steering};
use super::sampling::uniform_sample;
use super::tree::straight_line_steer;
use super::PlannerConfig;
use crate::corridor::{build_corridor, project_onto_corridor};
use crate::error::{Error, Result};
use crate::model::GuideModel;
use crate::robots::Scenario;

/// Uniform draws allowed per requested vertex before giving up.
const DRAWS_PER_VERTEX: usize = 1000;

/// Steering primitive used to certify roadmap edges.
#[derive(Debug, Clone, Copy)]
pub enum LocalPlanner<'a> {
    StraightLine,
    SafetyGuided(&'a GuideModel),
}

impl<'a> LocalPlanner<'a> {
    fn steering(self) -> Steering<'a> {
        match self {
            LocalPlanner::StraightLine => Steering::Straight,
            LocalPlanner::SafetyGuided(m) => Steering::Config(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadmapEdge {
    pub a: usize,
    pub b: usize,
    /// Configurations visited by the local planner, `a` first and `b` last.
    pub waypoints: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Roadmap {
    pub vertices: Vec<DVector<f64>>,
    pub edges: Vec<RoadmapEdge>,
    pub attempted_pairs: usize,
    pub collision_checks: usize,
}

impl Roadmap {
    /// Component label per vertex (smallest member index).
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for e in &self.edges {
            let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent[hi] = lo;
            }
        }
        (0..self.vertices.len()).map(|i| find(&mut parent, i)).collect()
    }

    pub fn largest_component(&self) -> usize {
        let labels = self.components();
        let mut counts = vec![0usize; labels.len()];
        for l in labels {
            counts[l] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalConnect {
    pub success: bool,
    pub steps: usize,
    pub waypoints: Vec<DVector<f64>>,
}

/// Steers from `q_a` toward `q_b` for at most `max_steps` steps. Succeeds
/// once the current configuration is within `d_min` of `q_b` and the final
/// segment to `q_b` is free.
pub fn local_connect(
    ctx: &mut ExtendContext<'_>,
    q_a: &DVector<f64>,
    q_b: &DVector<f64>,
    planner: LocalPlanner<'_>,
    max_steps: usize,
) -> LocalConnect {
    let mut current = q_a.clone();
    let mut waypoints = vec![current.clone()];
    let mut steps = 0;
    loop {
        if (&current - q_b).norm() <= ctx.config.d_min {
            let ok = &current == q_b || ctx.checker.extension_free(&current, q_b);
            if ok && &current != q_b {
                waypoints.push(q_b.clone());
            }
            return LocalConnect {
                success: ok,
                steps,
                waypoints,
            };
        }
        if steps == max_steps {
            break;
        }
        let target = match planner.steering() {
            Steering::Config(m) => {
                ctx.stats.corridor_builds += 1;
                let proj = build_corridor(&current, &m.gmm, &m.levels, ctx.config.epsilon)
                    .and_then(|c| project_onto_corridor(&c, q_b, &mut ctx.cache));
                match proj {
                    Ok(p) => {
                        ctx.stats.projection_iterations += p.iterations;
                        p.point
                    }
                    Err(_) => {
                        ctx.stats.projection_failures += 1;
                        ctx.cache.invalidate();
                        break;
                    }
                }
            }
            _ => q_b.clone(),
        };
        let next = straight_line_steer(&current, &target, ctx.config.delta);
        if next == current {
            break;
        }
        steps += 1;
        ctx.stats.extensions += 1;
        if !ctx.checker.extension_free(&current, &next) {
            ctx.stats.colliding_extensions += 1;
            break;
        }
        waypoints.push(next.clone());
        current = next;
    }
    LocalConnect {
        success: false,
        steps,
        waypoints,
    }
}

/// Samples `n_vertices` collision-free configurations and tries to connect
/// every vertex with its `k_neighbors` nearest vertices. Each unordered
/// pair is attempted once, lower index first; the guided planner also
/// tries the reverse direction.
pub fn prm_build<R: Rng + ?Sized>(
    scenario: &Scenario,
    n_vertices: usize,
    k_neighbors: usize,
    local_planner: LocalPlanner<'_>,
    config: &PlannerConfig,
    max_steps: usize,
    rng: &mut R,
) -> Result<Roadmap> {
    if n_vertices < 2 {
        return Err(Error::InvalidConfig("a roadmap needs at least two vertices".into()));
    }
    config.validate()?;
    let robot = &scenario.robot;
    let checker = CollisionChecker::new(robot, &scenario.obstacles, config.resolution);
    let mut ctx = ExtendContext::new(checker, config);

    let mut vertices = Vec::with_capacity(n_vertices);
    let mut draws = 0;
    while vertices.len() < n_vertices && draws < n_vertices * DRAWS_PER_VERTEX {
        draws += 1;
        let q = uniform_sample(&robot.joint_limits, rng);
        if !ctx.checker.collides(&q) {
            vertices.push(q);
        }
    }

    let mut pairs = BTreeSet::new();
    for (i, v) in vertices.iter().enumerate() {
        let mut order: Vec<(f64, usize)> = vertices
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, w)| ((w - v).norm_squared(), j))
            .collect();
        order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for &(_, j) in order.iter().take(k_neighbors) {
            pairs.insert((i.min(j), i.max(j)));
        }
    }

    let mut edges = Vec::new();
    for &(a, b) in &pairs {
        let mut c = local_connect(&mut ctx, &vertices[a], &vertices[b], local_planner, max_steps);
        if !c.success && matches!(local_planner, LocalPlanner::SafetyGuided(_)) {
            c = local_connect(&mut ctx, &vertices[b], &vertices[a], local_planner, max_steps);
            c.waypoints.reverse();
        }
        if c.success {
            edges.push(RoadmapEdge {
                a,
                b,
                waypoints: c.waypoints,
            });
        }
    }
    Ok(Roadmap {
        vertices,
        edges,
        attempted_pairs: pairs.len(),
        collision_checks: ctx.checker.checks,
    })
}
