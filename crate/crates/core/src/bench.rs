//! Benchmark sweeps over scenarios, variants, seeds and training-set sizes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LearnedModels;
use crate::planners::{plan, PlanResult, Variant};
use crate::robots::{generate_training_samples, generate_workspace_samples, SampleMode, Scenario};
use crate::stats::{iqr, mean, median};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SAFECORRIDOR_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub scenarios: Vec<PathBuf>,
    pub variants: Vec<Variant>,
    /// First seed; trial `i` uses `seed_start + i`.
    #[serde(default)]
    pub seed_start: u64,
    pub seeds: u64,
    /// Training-set sizes to sweep. Empty means a single fixed model (or
    /// none, for variants that need none).
    #[serde(default)]
    pub training_sizes: Vec<usize>,
    /// Prebuilt model used when `training_sizes` is empty.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default = "default_mode")]
    pub sample_mode: SampleMode,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Seed of the training-sample generator.
    #[serde(default)]
    pub model_seed: u64,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
}

fn default_mode() -> SampleMode {
    SampleMode::RrtTrace
}

fn default_bandwidth() -> f64 {
    10f64.to_radians()
}

fn default_kappa() -> f64 {
    0.9
}

fn default_out() -> PathBuf {
    PathBuf::from("bench-out")
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(Error::InvalidConfig("seed range is empty".into()));
        }
        if self.scenarios.is_empty() || self.variants.is_empty() {
            return Err(Error::InvalidConfig(
                "need at least one scenario and one variant".into(),
            ));
        }
        if self.training_sizes.contains(&0) {
            return Err(Error::NoSamples);
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::InvalidConfig("bandwidth must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// One CSV row per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario: String,
    pub variant: String,
    pub seed: u64,
    pub success: bool,
    pub extensions: usize,
    pub collision_checks: usize,
    pub colliding_extensions: usize,
    pub wall_time_ms: f64,
    /// Empty when no size sweep was run.
    pub training_samples: Option<usize>,
    /// Random samples drawn (outer planner iterations).
    pub iterations: usize,
    pub corridor_builds: usize,
}

impl BenchRow {
    pub fn from_result(scenario: &str, training: Option<usize>, r: &PlanResult) -> Self {
        BenchRow {
            scenario: scenario.to_string(),
            variant: r.variant.name().to_string(),
            seed: r.seed,
            success: r.success,
            extensions: r.stats.extensions,
            collision_checks: r.stats.collision_checks,
            colliding_extensions: r.stats.colliding_extensions,
            wall_time_ms: r.stats.wall_time_ms,
            training_samples: training,
            iterations: r.stats.samples,
            corridor_builds: r.stats.corridor_builds,
        }
    }

    pub fn colliding_fraction(&self) -> f64 {
        if self.extensions == 0 {
            0.0
        } else {
            self.colliding_extensions as f64 / self.extensions as f64
        }
    }
}

/// Runs `f` on a pool capped by [`THREADS_ENV`] when set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

/// Learns a model from the first `n` of a `max_n`-long training trace, so
/// that models for increasing sizes see nested sample sets.
pub fn learn_sized_models(
    scenario: &Scenario,
    sizes: &[usize],
    mode: SampleMode,
    bandwidth: f64,
    kappa: f64,
    seed: u64,
) -> Result<Vec<(usize, LearnedModels)>> {
    let max_n = sizes.iter().copied().max().ok_or(Error::NoSamples)?;
    let samples = generate_training_samples(scenario, max_n, mode, &mut ChaCha8Rng::seed_from_u64(seed))?;
    sizes
        .iter()
        .map(|&n| {
            let mut s = samples.clone();
            s.truncate(n);
            let mut models = LearnedModels::fit(&s, bandwidth, kappa)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            attach_workspace_model(
                &mut models,
                scenario,
                DEFAULT_WORKSPACE_SAMPLES,
                DEFAULT_WORKSPACE_BANDWIDTH,
                &mut rng,
            )?;
            Ok((n, models))
        })
        .collect()
}

pub const DEFAULT_WORKSPACE_SAMPLES: usize = 2000;
pub const DEFAULT_WORKSPACE_BANDWIDTH: f64 = 0.1;

/// Fits the end-effector obstacle model from `n` uniform workspace samples.
/// Does nothing for point robots, for `n = 0` or when no sample collides.
pub fn attach_workspace_model<R: rand::Rng + ?Sized>(
    models: &mut LearnedModels,
    scenario: &Scenario,
    n: usize,
    bandwidth: f64,
    rng: &mut R,
) -> Result<()> {
    if scenario.robot.arm().is_none() || n == 0 {
        return Ok(());
    }
    let ws = generate_workspace_samples(scenario, n, rng)?;
    if ws.collision_fraction() > 0.0 {
        models.fit_workspace(&ws, bandwidth)?;
    }
    Ok(())
}

struct Job<'a> {
    scenario: &'a Scenario,
    label: &'a str,
    models: &'a LearnedModels,
    training: Option<usize>,
    variant: Variant,
    seed: u64,
}

/// Runs every (scenario × size × variant × seed) trial and returns rows in
/// that nesting order regardless of scheduling.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let mut loaded = Vec::new();
    for path in &spec.scenarios {
        let mut s = Scenario::load(path)?;
        if let Some(b) = spec.budget {
            s.planner.budget = b;
        }
        let label = if s.name.is_empty() {
            path.display().to_string()
        } else {
            s.name.clone()
        };
        let models: Vec<(Option<usize>, LearnedModels)> = if spec.training_sizes.is_empty() {
            let m = match &spec.model {
                Some(p) => LearnedModels::load(p)?,
                None => LearnedModels::default(),
            };
            vec![(None, m)]
        } else {
            learn_sized_models(
                &s,
                &spec.training_sizes,
                spec.sample_mode,
                spec.bandwidth,
                spec.kappa,
                spec.model_seed,
            )?
            .into_iter()
            .map(|(n, m)| (Some(n), m))
            .collect()
        };
        loaded.push((s, label, models));
    }

    let mut jobs = Vec::new();
    for (s, label, models) in &loaded {
        for (training, m) in models {
            for &variant in &spec.variants {
                for i in 0..spec.seeds {
                    jobs.push(Job {
                        scenario: s,
                        label,
                        models: m,
                        training: *training,
                        variant,
                        seed: spec.seed_start + i,
                    });
                }
            }
        }
    }

    let results: Vec<Result<BenchRow>> = with_thread_cap(|| {
        jobs.par_iter()
            .map(|j| {
                let cfg = j.scenario.planner.clone().with_variant(j.variant).with_seed(j.seed);
                let mut rng = ChaCha8Rng::seed_from_u64(j.seed);
                plan(j.scenario, &cfg, j.models, &mut rng)
                    .map(|r| BenchRow::from_result(j.label, j.training, &r))
                    .map_err(|e| {
                        Error::InvalidConfig(format!(
                            "trial failed (scenario {}, variant {}, seed {}): {e}",
                            j.label, j.variant, j.seed
                        ))
                    })
            })
            .collect()
    })?;
    results.into_iter().collect()
}

pub fn write_csv(rows: &[BenchRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path.as_ref(), io),
        other => Error::InvalidConfig(format!("{other:?}")),
    })?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<BenchRow>> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    let mut rows = Vec::new();
    for r in csv::Reader::from_reader(file).deserialize() {
        rows.push(r?);
    }
    Ok(rows)
}

/// Per-group aggregate for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub scenario: String,
    pub training_samples: Option<usize>,
    pub variant: String,
    pub trials: usize,
    pub success_rate: f64,
    pub collision_checks_median: f64,
    pub collision_checks_iqr: (f64, f64),
    pub colliding_fraction_median: f64,
    pub iterations_mean: f64,
    pub wall_time_ms_median: f64,
}

/// Groups rows by (scenario, training size, variant) in first-seen order.
pub fn summarize(rows: &[BenchRow]) -> Vec<GroupSummary> {
    let mut order = Vec::new();
    let mut groups: BTreeMap<(String, Option<usize>, String), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.scenario.clone(), r.training_samples, r.variant.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let col = |f: &dyn Fn(&BenchRow) -> f64| g.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let checks = col(&|r| r.collision_checks as f64);
            GroupSummary {
                scenario: key.0,
                training_samples: key.1,
                variant: key.2,
                trials: g.len(),
                success_rate: g.iter().filter(|r| r.success).count() as f64 / g.len() as f64,
                collision_checks_median: median(&checks),
                collision_checks_iqr: iqr(&checks),
                colliding_fraction_median: median(&col(&|r| r.colliding_fraction())),
                iterations_mean: mean(&col(&|r| r.iterations as f64)),
                wall_time_ms_median: median(&col(&|r| r.wall_time_ms)),
            }
        })
        .collect()
}

pub fn markdown_summary(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "| scenario | training | variant | trials | success | collision checks (median [IQR]) | colliding fraction (median) | iterations (mean) | wall ms (median) |\n\
         |---|---|---|---|---|---|---|---|---|\n",
    );
    for g in summarize(rows) {
        let training = g.training_samples.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {:.2} | {:.0} [{:.0}, {:.0}] | {:.3} | {:.1} | {:.2} |",
            g.scenario,
            training,
            g.variant,
            g.trials,
            g.success_rate,
            g.collision_checks_median,
            g.collision_checks_iqr.0,
            g.collision_checks_iqr.1,
            g.colliding_fraction_median,
            g.iterations_mean,
            g.wall_time_ms_median
        );
    }
    out
}
