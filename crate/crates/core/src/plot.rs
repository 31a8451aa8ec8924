//! Self-contained SVG charts and planning-scene renders.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DVector;

use crate::bench::BenchRow;
use crate::error::{Error, Result};
use crate::planners::PlanResult;
use crate::robots::{RobotKind, Scenario};
use crate::stats::{iqr, mean, median};

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Metric read from a bench row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    CollisionChecks,
    Iterations,
    Extensions,
    WallTime,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "collision_checks" => Ok(Metric::CollisionChecks),
            "iterations" => Ok(Metric::Iterations),
            "extensions" => Ok(Metric::Extensions),
            "wall_time_ms" | "wall_time" => Ok(Metric::WallTime),
            _ => Err(Error::InvalidConfig(format!("unknown metric '{s}'"))),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Metric::CollisionChecks => "collision checks",
            Metric::Iterations => "iterations",
            Metric::Extensions => "extensions",
            Metric::WallTime => "wall time (ms)",
        }
    }

    fn of(self, r: &BenchRow) -> f64 {
        match self {
            Metric::CollisionChecks => r.collision_checks as f64,
            Metric::Iterations => r.iterations as f64,
            Metric::Extensions => r.extensions as f64,
            Metric::WallTime => r.wall_time_ms,
        }
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, y_max: f64, y_label: &str) {
    let (x0, y0, y1) = (MARGIN, H - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        W - MARGIN / 2.0
    );
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for i in 0..=4 {
        let v = y_max * i as f64 / 4.0;
        let y = y0 - (y0 - y1) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            y + 4.0,
            fmt_num(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
}

fn fmt_num(v: f64) -> String {
    if v.abs() >= 100.0 || v == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn y_of(v: f64, y_max: f64) -> f64 {
    let (y0, y1) = (H - MARGIN, MARGIN);
    y0 - (y0 - y1) * (v / y_max)
}

/// One bar per variant at the median of `metric`, with IQR whiskers.
pub fn bar_chart(rows: &[BenchRow], metric: Metric) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig("no rows to plot".into()));
    }
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for r in rows {
        let v = metric.of(r);
        match groups.iter_mut().find(|g| g.0 == r.variant) {
            Some(g) => g.1.push(v),
            None => groups.push((r.variant.clone(), vec![v])),
        }
    }
    let stats: Vec<(String, f64, (f64, f64))> = groups.into_iter().map(|(n, v)| (n, median(&v), iqr(&v))).collect();
    let y_max = stats.iter().map(|s| s.2 .1.max(s.1)).fold(0.0, f64::max).max(1e-9) * 1.1;

    let mut out = String::new();
    header(&mut out, &format!("median {} per variant", metric.label()));
    axes(&mut out, y_max, metric.label());
    let slot = (W - 1.5 * MARGIN) / stats.len() as f64;
    for (i, (name, med, (lo, hi))) in stats.iter().enumerate() {
        let cx = MARGIN + slot * (i as f64 + 0.5);
        let bw = slot * 0.6;
        let top = y_of(*med, y_max);
        let _ = writeln!(
            out,
            r#"<g class="bar-group"><rect x="{:.1}" y="{top:.1}" width="{bw:.1}" height="{:.1}" fill="{}"/>"#,
            cx - bw / 2.0,
            (H - MARGIN) - top,
            PALETTE[i % PALETTE.len()]
        );
        let (ylo, yhi) = (y_of(*lo, y_max), y_of(*hi, y_max));
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.1}" y1="{ylo:.1}" x2="{cx:.1}" y2="{yhi:.1}" stroke="black"/>"#
        );
        for y in [ylo, yhi] {
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black"/>"#,
                cx - 6.0,
                cx + 6.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{}" text-anchor="middle">{}</text></g>"#,
            H - MARGIN + 16.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Mean of `metric` against training-set size, one polyline per variant.
pub fn curve_chart(rows: &[BenchRow], metric: Metric) -> Result<String> {
    let mut series: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        if let Some(n) = r.training_samples {
            series
                .entry(r.variant.clone())
                .or_default()
                .entry(n)
                .or_default()
                .push(metric.of(r));
        }
    }
    if series.is_empty() {
        return Err(Error::InvalidConfig("no rows with a training size to plot".into()));
    }
    let sizes: Vec<usize> = {
        let mut s: Vec<usize> = series.values().flat_map(|m| m.keys().copied()).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let y_max = series
        .values()
        .flat_map(|m| m.values().map(|v| mean(v)))
        .fold(0.0, f64::max)
        .max(1e-9)
        * 1.1;
    // log-spaced x positions when sizes span more than a decade
    let log = sizes.len() > 1 && sizes[sizes.len() - 1] as f64 / sizes[0].max(1) as f64 > 10.0;
    let xf = |n: usize| if log { (n.max(1) as f64).ln() } else { n as f64 };
    let (xmin, xmax) = (xf(sizes[0]), xf(*sizes.last().unwrap()));
    let x_of = |n: usize| {
        let t = if xmax > xmin {
            (xf(n) - xmin) / (xmax - xmin)
        } else {
            0.5
        };
        MARGIN + 20.0 + t * (W - 2.5 * MARGIN - 20.0)
    };

    let mut out = String::new();
    header(&mut out, &format!("mean {} vs training samples", metric.label()));
    axes(&mut out, y_max, metric.label());
    for &n in &sizes {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{n}</text>"#,
            x_of(n),
            H - MARGIN + 16.0
        );
    }
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|(&n, v)| format!("{:.1},{:.1}", x_of(n), y_of(mean(v), y_max)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - 1.4 * MARGIN,
            MARGIN + 14.0 * i as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Configuration-space render for two-dimensional robots: an occupancy
/// raster, the search trees and the path.
pub fn scene_svg(scenario: &Scenario, result: Option<&PlanResult>) -> Result<String> {
    if scenario.robot.dim() != 2 {
        return Err(Error::InvalidConfig(
            "scene rendering needs a two-dimensional configuration space".into(),
        ));
    }
    let lim = &scenario.robot.joint_limits;
    let side = H - 2.0 * 24.0;
    let (ox, oy) = ((W - side) / 2.0, 24.0);
    let px = |q: &DVector<f64>| {
        let u = (q[0] - lim[0][0]) / (lim[0][1] - lim[0][0]);
        let v = (q[1] - lim[1][0]) / (lim[1][1] - lim[1][0]);
        (ox + u * side, oy + (1.0 - v) * side)
    };

    let mut out = String::new();
    header(&mut out, &scenario.name);
    let _ = writeln!(
        out,
        r#"<rect x="{ox}" y="{oy}" width="{side}" height="{side}" fill="none" stroke="black"/>"#
    );
    match &scenario.robot.kind {
        RobotKind::Point(_) => {
            for c in &scenario.obstacles.circles {
                let (cx, cy) = px(&DVector::from_column_slice(&c.center));
                let r = (c.radius + scenario.obstacles.margin) / (lim[0][1] - lim[0][0]) * side;
                let _ = writeln!(out, r##"<circle cx="{cx:.1}" cy="{cy:.1}" r="{r:.1}" fill="#888"/>"##);
            }
            for b in &scenario.obstacles.boxes {
                let m = scenario.obstacles.margin;
                let (x0, y1) = px(&DVector::from_vec(vec![b.min[0] - m, b.min[1] - m]));
                let (x1, y0) = px(&DVector::from_vec(vec![b.max[0] + m, b.max[1] + m]));
                let _ = writeln!(
                    out,
                    r##"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="#888"/>"##,
                    x1 - x0,
                    y1 - y0
                );
            }
        }
        RobotKind::PlanarArm(_) => {
            let n = 80;
            let cell = side / n as f64;
            for i in 0..n {
                for j in 0..n {
                    let q = DVector::from_vec(vec![
                        lim[0][0] + (lim[0][1] - lim[0][0]) * (i as f64 + 0.5) / n as f64,
                        lim[1][0] + (lim[1][1] - lim[1][0]) * (j as f64 + 0.5) / n as f64,
                    ]);
                    if scenario.robot.config_collision(&q, &scenario.obstacles) {
                        let _ = writeln!(
                            out,
                            r##"<rect x="{:.1}" y="{:.1}" width="{:.2}" height="{:.2}" fill="#bbb"/>"##,
                            ox + i as f64 * cell,
                            oy + side - (j + 1) as f64 * cell,
                            cell + 0.05,
                            cell + 0.05
                        );
                    }
                }
            }
        }
    }
    if let Some(r) = result {
        for (t, tree) in r.trees.iter().enumerate() {
            let color = if t == 0 { "#1f77b4" } else { "#2ca02c" };
            for (p, c) in tree.edges() {
                let (a, b) = (px(tree.node(p)), px(tree.node(c)));
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="0.6"/>"#,
                    a.0, a.1, b.0, b.1
                );
            }
        }
        let path = r.path_configs();
        if path.len() > 1 {
            let pts: Vec<String> = path
                .iter()
                .map(|q| {
                    let (x, y) = px(q);
                    format!("{x:.1},{y:.1}")
                })
                .collect();
            let _ = writeln!(
                out,
                r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="2"/>"##,
                pts.join(" ")
            );
        }
    }
    for (q, color) in [(&scenario.start, "#000"), (&scenario.goal, "#d62728")] {
        let (x, y) = px(q);
        let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="4" fill="{color}"/>"#);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(variant: &str, n: Option<usize>, checks: usize) -> BenchRow {
        BenchRow {
            scenario: "s".into(),
            variant: variant.into(),
            seed: 0,
            success: true,
            extensions: 1,
            collision_checks: checks,
            colliding_extensions: 0,
            wall_time_ms: 0.0,
            training_samples: n,
            iterations: checks / 2,
            corridor_builds: 0,
        }
    }

    #[test]
    fn two_variants_give_two_bar_groups() {
        let rows = vec![row("rrt", None, 10), row("sg-rrt", None, 4), row("rrt", None, 12)];
        let svg = bar_chart(&rows, Metric::CollisionChecks).unwrap();
        assert_eq!(svg.matches(r#"class="bar-group""#).count(), 2);
    }

    #[test]
    fn three_sizes_give_three_point_polyline() {
        let rows = vec![
            row("sg-rrt", Some(300), 10),
            row("sg-rrt", Some(1000), 8),
            row("sg-rrt", Some(10000), 6),
        ];
        let svg = curve_chart(&rows, Metric::Iterations).unwrap();
        let line = svg.lines().find(|l| l.contains(r#"class="series""#)).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 3);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(bar_chart(&[], Metric::CollisionChecks).is_err());
        assert!(curve_chart(&[row("rrt", None, 1)], Metric::Iterations).is_err());
    }
}
