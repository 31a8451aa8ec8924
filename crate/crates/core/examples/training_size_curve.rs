//! Sweeps the training-set size for the guided planners on
//! passage-point2d and writes the bench
//! CSV, a summary table and two SVG charts.
//!
//! cargo run --release --example training_size_curve -- [seeds] [out_dir]

use std::path::PathBuf;

use safecorridor::bench::{markdown_summary, run_bench, write_csv, BenchSpec};
use safecorridor::planners::Variant;
use safecorridor::plot::{bar_chart, curve_chart, Metric};
use safecorridor::robots::SampleMode;

fn main() -> safecorridor::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = args.first().map_or(20, |s| s.parse().expect("seed count"));
    let out_dir = args
        .get(1)
        .map_or_else(|| std::env::temp_dir().join("training_size_curve"), PathBuf::from);
    let spec = BenchSpec {
        scenarios: vec![PathBuf::from(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/scenarios/passage-point2d.json"
        ))],
        variants: vec![Variant::SgRrt, Variant::GmmSgRrt],
        seed_start: 0,
        seeds,
        training_sizes: vec![100, 300, 1000, 3000],
        model: None,
        sample_mode: SampleMode::RrtTrace,
        bandwidth: 0.1,
        kappa: 0.9,
        model_seed: 0,
        budget: None,
        out_dir: out_dir.clone(),
    };
    let rows = run_bench(&spec)?;
    std::fs::create_dir_all(&out_dir).expect("create output directory");
    write_csv(&rows, out_dir.join("bench.csv"))?;
    print!("{}", markdown_summary(&rows));
    let curve = curve_chart(&rows, Metric::Iterations)?;
    std::fs::write(out_dir.join("iterations.svg"), curve).expect("write svg");
    let bars = bar_chart(&rows, Metric::CollisionChecks)?;
    std::fs::write(out_dir.join("collision_checks.svg"), bars).expect("write svg");
    println!("outputs in {}", out_dir.display());
    Ok(())
}
