//! Command-line front end. Exit codes: 0 success, 1 no path found, 2 usage
//! or input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bench::{
    attach_workspace_model, markdown_summary, read_csv, run_bench, write_csv, BenchSpec, DEFAULT_WORKSPACE_BANDWIDTH,
    DEFAULT_WORKSPACE_SAMPLES,
};
use crate::error::{Error, Result};
use crate::model::LearnedModels;
use crate::planners::{plan, Variant};
use crate::plot::{bar_chart, curve_chart, scene_svg, Metric};
use crate::robots::{generate_training_samples, SampleMode, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_FOUND: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "safecorridor",
    version,
    about = "Learned-corridor sampling-based motion planning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate training samples and fit obstacle and free-space models.
    Learn(LearnArgs),
    /// Run one planner on a scenario.
    Plan(PlanArgs),
    /// Sweep scenarios, variants, seeds and training sizes.
    Bench(BenchArgs),
    /// Render a bench CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value = "rrt-trace")]
    pub mode: String,
    /// Meanshift bandwidth in configuration units (radians for arms).
    #[arg(long, conflicts_with = "bandwidth_deg")]
    pub bandwidth: Option<f64>,
    /// Bandwidth in degrees, converted to radians.
    #[arg(long)]
    pub bandwidth_deg: Option<f64>,
    #[arg(long, default_value_t = 0.9)]
    pub kappa: f64,
    #[arg(long, default_value_t = crate::corridor::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Uniform end-effector-space samples for the task-space model (arms
    /// only; 0 disables).
    #[arg(long, default_value_t = DEFAULT_WORKSPACE_SAMPLES)]
    pub workspace_samples: usize,
    /// Bandwidth of the task-space model in workspace length units.
    #[arg(long, default_value_t = DEFAULT_WORKSPACE_BANDWIDTH)]
    pub workspace_bandwidth: f64,
    /// Also write the labeled training samples as CSV.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Defaults to the scenario's configured variant.
    #[arg(long)]
    pub variant: Option<String>,
    /// Defaults to the scenario's configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Result JSON path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// JSON bench spec; the flags below build one when it is absent.
    pub spec: Option<PathBuf>,
    #[arg(long = "scenario")]
    pub scenarios: Vec<PathBuf>,
    #[arg(long = "variant", value_delimiter = ',')]
    pub variants: Vec<String>,
    #[arg(long, default_value_t = 50)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed_start: u64,
    #[arg(long, value_delimiter = ',')]
    pub training_sizes: Vec<usize>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub csv: PathBuf,
    #[arg(long, default_value = "bars")]
    pub kind: String,
    /// Defaults to collision_checks for bars and iterations for curves.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long, default_value = "plot.svg")]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Learn(a) => cmd_learn(&a),
        Command::Plan(a) => cmd_plan(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Plot(a) => cmd_plot(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn cmd_learn(a: &LearnArgs) -> Result<i32> {
    let scenario = Scenario::load(&a.scenario)?;
    let mode: SampleMode = a.mode.parse()?;
    let bandwidth = match (a.bandwidth, a.bandwidth_deg) {
        (Some(b), _) => b,
        (None, Some(d)) => d.to_radians(),
        (None, None) => 10f64.to_radians(),
    };
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidConfig("bandwidth must be positive".into()));
    }
    if !(a.kappa > 0.0 && a.kappa < 1.0) {
        return Err(Error::InvalidConfig("kappa must lie in (0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let clock = Instant::now();
    let samples = generate_training_samples(&scenario, a.samples, mode, &mut rng)?;
    let sample_ms = clock.elapsed().as_secs_f64() * 1e3;
    if let Some(p) = &a.samples_out {
        samples.save_csv(p)?;
    }
    let clock = Instant::now();
    let mut models = LearnedModels::fit(&samples, bandwidth, a.kappa)?;
    models.epsilon = a.epsilon;
    attach_workspace_model(
        &mut models,
        &scenario,
        a.workspace_samples,
        a.workspace_bandwidth,
        &mut rng,
    )?;
    let fit_ms = clock.elapsed().as_secs_f64() * 1e3;
    models.save(&a.out)?;

    let colliding = samples.labels().iter().filter(|&&l| l).count();
    println!(
        "samples: {} ({} colliding, {} free)",
        samples.len(),
        colliding,
        samples.len() - colliding
    );
    println!(
        "clusters: collision {}, free {}, workspace {}",
        models.collision.as_ref().map_or(0, |m| m.gmm.len()),
        models.free.as_ref().map_or(0, |g| g.len()),
        models.workspace.as_ref().map_or(0, |m| m.gmm.len())
    );
    println!("sampling time: {sample_ms:.1} ms, fit time: {fit_ms:.1} ms");
    println!("model written to {}", a.out.display());
    Ok(EXIT_OK)
}

pub fn cmd_plan(a: &PlanArgs) -> Result<i32> {
    let scenario = Scenario::load(&a.scenario)?;
    let mut config = scenario.planner.clone();
    if let Some(v) = &a.variant {
        config.variant = v.parse::<Variant>()?;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(b) = a.budget {
        config.budget = b;
    }
    let models = match &a.model {
        Some(p) => LearnedModels::load(p)?,
        None if config.variant.needs_model() => {
            return Err(Error::InvalidConfig(format!(
                "variant {} needs --model",
                config.variant
            )))
        }
        None => LearnedModels::default(),
    };
    if a.model.is_some() {
        config.kappa = models.kappa;
        config.epsilon = models.epsilon;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let result = plan(&scenario, &config, &models, &mut rng)?;
    let json = result.to_json()? + "\n";
    match &a.out {
        Some(p) => write_text(p, &json)?,
        None => print!("{json}"),
    }
    if let Some(p) = &a.svg {
        write_text(p, &scene_svg(&scenario, Some(&result))?)?;
    }
    eprintln!(
        "{}: {} after {} extensions, {} collision checks",
        config.variant,
        if result.success { "path found" } else { "no path" },
        result.stats.extensions,
        result.stats.collision_checks
    );
    Ok(if result.success { EXIT_OK } else { EXIT_NOT_FOUND })
}

pub fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let mut spec = match &a.spec {
        Some(p) => BenchSpec::load(p)?,
        None => BenchSpec {
            scenarios: a.scenarios.clone(),
            variants: a.variants.iter().map(|v| v.parse()).collect::<Result<_>>()?,
            seed_start: a.seed_start,
            seeds: a.seeds,
            training_sizes: a.training_sizes.clone(),
            model: a.model.clone(),
            sample_mode: SampleMode::RrtTrace,
            bandwidth: 10f64.to_radians(),
            kappa: 0.9,
            model_seed: 0,
            budget: a.budget,
            out_dir: PathBuf::from("bench-out"),
        },
    };
    if let Some(d) = &a.out_dir {
        spec.out_dir = d.clone();
    }
    let rows = run_bench(&spec)?;
    std::fs::create_dir_all(&spec.out_dir).map_err(|e| Error::io(&spec.out_dir, e))?;
    let csv_path = spec.out_dir.join("bench.csv");
    write_csv(&rows, &csv_path)?;
    let summary = markdown_summary(&rows);
    write_text(&spec.out_dir.join("summary.md"), &summary)?;
    print!("{summary}");
    println!("{} trials written to {}", rows.len(), csv_path.display());
    Ok(EXIT_OK)
}

pub fn cmd_plot(a: &PlotArgs) -> Result<i32> {
    let rows = read_csv(&a.csv)?;
    let svg = match a.kind.as_str() {
        "bars" => bar_chart(&rows, Metric::parse(a.metric.as_deref().unwrap_or("collision_checks"))?)?,
        "curve" => curve_chart(&rows, Metric::parse(a.metric.as_deref().unwrap_or("iterations"))?)?,
        other => return Err(Error::InvalidConfig(format!("unknown plot kind '{other}'"))),
    };
    write_text(&a.out, &svg)?;
    Ok(EXIT_OK)
}
