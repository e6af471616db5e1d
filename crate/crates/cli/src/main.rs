//! Command-line surface for the warmlab library: update-magnitude
//! simulations, warmup-schedule tables, momentum-phase boundary sweeps, and
//! training runs with gradient probes. Every run writes machine-readable
//! CSV artifacts plus one JSON manifest holding the fully resolved
//! configuration, so any run can be reproduced byte-for-byte with
//! `--config <manifest>`.
//!
//! Exit codes: 0 success, 1 runtime/data error, 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use warmlab::error::Error as CoreError;
use warmlab::optim::OptimizerKind;
use warmlab::schedules::{
    effective_warmup_period, fact1_default_grid, verify_fact1, WarmupSchedule,
};
use warmlab::sim::{run_local_minimum_sim, stationary_median, write_trajectory_csv, SimConfig};
use warmlab::train::{
    compare_warmups, load_idx, save_model, synthetic_digits, train, write_compare_csv,
    write_loss_csv, write_probe_csv, TrainConfig,
};

/// Environment variable holding the default output directory.
const OUT_DIR_ENV: &str = "WARMLAB_OUT_DIR";

#[derive(Parser)]
#[command(name = "warmlab", version, about = "Optimizer warmup analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate Adam's update-magnitude distribution at a local minimum.
    Simulate(SimulateArgs),
    /// Tabulate a warmup schedule and its effective warmup period.
    Schedule(ScheduleArgs),
    /// Exhaustively verify the momentum-phase boundary (rho_t <= 4 iff t <= 4).
    Fact1(Fact1Args),
    /// Train the probe classifier on an IDX dataset.
    Train(TrainArgs),
    /// Generate a synthetic digit dataset in IDX format.
    Dataset(DatasetArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory (default: $WARMLAB_OUT_DIR or the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file (a previous run's manifest also works); explicit
    /// flags override config values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Number of simulated parameters.
    #[arg(long)]
    params: Option<usize>,
    /// Trajectory length in iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Gradient variance.
    #[arg(long)]
    variance: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated quantile levels in (0, 1).
    #[arg(long, value_parser = parse_quantiles)]
    quantiles: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run the long (10000-iteration) variant and print the final median.
    #[arg(long)]
    stationary: bool,
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Schedule kind: constant, linear, expo, linear-untuned, expo-untuned, radam.
    #[arg(long)]
    kind: Option<String>,
    /// Second-moment discount factor for the untuned and radam kinds.
    #[arg(long)]
    beta2: Option<f64>,
    /// Warmup period for the linear and expo kinds.
    #[arg(long)]
    tau: Option<f64>,
    /// Last iteration tabulated in the CSV.
    #[arg(long)]
    t_max: Option<u64>,
    /// Also print the effective warmup period.
    #[arg(long)]
    effective_period: bool,
    /// Truncation tolerance for the effective-period summation.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct Fact1Args {
    #[command(flatten)]
    output: OutputArgs,
    /// Smallest beta2 on the sweep grid (hypothesis requires >= 0.8).
    #[arg(long)]
    beta2_min: Option<f64>,
    /// Grid step.
    #[arg(long)]
    beta2_step: Option<f64>,
    /// Largest iteration checked per grid point.
    #[arg(long)]
    t_max: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// IDX image file (optionally gzipped).
    #[arg(long)]
    images: Option<PathBuf>,
    /// IDX label file (optionally gzipped).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Optimizer: adam, radam, sgd.
    #[arg(long)]
    optimizer: Option<String>,
    /// Warmup: none, linear-untuned, expo-untuned, linear, expo.
    #[arg(long)]
    warmup: Option<String>,
    /// Warmup period for the linear and expo warmup kinds.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    /// Enable the gradient-statistics probe.
    #[arg(long)]
    probe: bool,
    /// Probe every N iterations (implies --probe).
    #[arg(long)]
    probe_every: Option<usize>,
    /// Gradient samples per probed iteration (implies --probe).
    #[arg(long)]
    probe_samples: Option<usize>,
    /// Parameters sampled per weight matrix (implies --probe).
    #[arg(long)]
    probe_params: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run exponential-untuned, linear-untuned, and RAdam back to back with
    /// shared data order and report the final-loss table.
    #[arg(long)]
    compare_warmups: bool,
    /// Number of seeds for --compare-warmups (seed, seed+1, …).
    #[arg(long)]
    seeds: Option<u64>,
}

#[derive(Args)]
struct DatasetArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Number of examples.
    #[arg(long)]
    n: Option<usize>,
    /// Canvas side length in pixels.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Resolved `schedule` run configuration (stored in the manifest).
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
struct ScheduleConfig {
    schedule: WarmupSchedule,
    t_max: u64,
    effective_period: bool,
    tolerance: f64,
}

/// Resolved `fact1` run configuration.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
struct Fact1Config {
    beta2_grid: Vec<f64>,
    t_max: u64,
}

/// Resolved `train` run configuration.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
struct TrainCliConfig {
    images: PathBuf,
    labels: PathBuf,
    train: TrainConfig,
    compare_warmups: bool,
    compare_seeds: u64,
}

/// Resolved `dataset` run configuration.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
struct DatasetConfig {
    n: usize,
    size: usize,
    seed: u64,
}

enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Maps a core validation error to a usage error (for pre-run config checks).
fn usage_from(e: CoreError) -> CliError {
    CliError::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Schedule(args) => cmd_schedule(args),
        Command::Fact1(args) => cmd_fact1(args),
        Command::Train(args) => cmd_train(args),
        Command::Dataset(args) => cmd_dataset(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn parse_quantiles(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|part| part.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

fn out_dir(args: &OutputArgs) -> CliResult<PathBuf> {
    let dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

/// Loads a config file; if it is a run manifest, extracts its `config` field.
fn load_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let config_value = match &value {
        serde_json::Value::Object(map) if map.contains_key("command") && map.contains_key("config") => {
            map["config"].clone()
        }
        _ => value,
    };
    serde_json::from_value(config_value)
        .map_err(|e| usage(format!("{}: invalid config: {e}", path.display())))
}

fn load_config_or<T: DeserializeOwned>(path: Option<&PathBuf>, default: T) -> CliResult<T> {
    match path {
        Some(p) => load_config(p),
        None => Ok(default),
    }
}

#[derive(Serialize)]
struct RunManifest<'a, C: Serialize> {
    command: &'a str,
    tool_version: &'a str,
    seed: u64,
    config: &'a C,
    outputs: Vec<String>,
}

fn write_manifest<C: Serialize>(
    dir: &Path,
    command: &str,
    seed: u64,
    config: &C,
    outputs: &[&str],
) -> CliResult<PathBuf> {
    let manifest = RunManifest {
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    let path = dir.join(format!("{command}-manifest.json"));
    let json = serde_json::to_string_pretty(&manifest).context("serializing manifest")?;
    std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let dir = out_dir(&args.output)?;
    let mut cfg: SimConfig = load_config_or(args.output.config.as_ref(), SimConfig::default())?;
    if let Some(v) = args.params {
        cfg.n_params = v;
    }
    if let Some(v) = args.iters {
        cfg.n_iters = v;
    } else if args.stationary && args.output.config.is_none() {
        cfg.n_iters = 10_000;
    }
    if let Some(v) = args.variance {
        cfg.grad_variance = v;
    }
    if let Some(v) = args.beta1 {
        cfg.hp.beta1 = v;
    }
    if let Some(v) = args.beta2 {
        cfg.hp.beta2 = v;
    }
    if let Some(v) = args.epsilon {
        cfg.hp.epsilon = v;
    }
    if let Some(v) = args.quantiles {
        cfg.quantiles = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    cfg.validate().map_err(usage_from)?;

    let trajectory = run_local_minimum_sim(&cfg).map_err(|e| anyhow::Error::from(e))?;
    let mut csv = Vec::new();
    write_trajectory_csv(&trajectory, &mut csv).context("formatting trajectory CSV")?;
    write_file(&dir, "trajectory.csv", &csv)?;
    write_manifest(&dir, "simulate", cfg.seed, &cfg, &["trajectory.csv"])?;
    println!(
        "simulate: {} params x {} iterations -> {}",
        cfg.n_params,
        cfg.n_iters,
        dir.join("trajectory.csv").display()
    );
    if args.stationary {
        let median = stationary_median(&cfg).map_err(anyhow::Error::from)?;
        println!("stationary median update magnitude: {median}");
    }
    Ok(())
}

fn resolve_schedule(
    kind: Option<&str>,
    beta2: Option<f64>,
    tau: Option<f64>,
) -> CliResult<WarmupSchedule> {
    let kind = kind.unwrap_or("linear-untuned");
    let beta2 = beta2.unwrap_or(0.999);
    let need_tau = || tau.ok_or_else(|| usage(format!("--kind {kind} requires --tau")));
    match kind {
        "constant" => Ok(WarmupSchedule::ConstantOne),
        "linear" => WarmupSchedule::linear(need_tau()?).map_err(usage_from),
        "expo" => WarmupSchedule::exponential(need_tau()?).map_err(usage_from),
        "linear-untuned" => WarmupSchedule::linear_untuned(beta2).map_err(usage_from),
        "expo-untuned" => WarmupSchedule::exponential_untuned(beta2).map_err(usage_from),
        "radam" => WarmupSchedule::radam_rectifier(beta2).map_err(usage_from),
        other => Err(usage(format!(
            "unknown schedule kind '{other}' (expected constant, linear, expo, \
             linear-untuned, expo-untuned, or radam)"
        ))),
    }
}

fn cmd_schedule(args: ScheduleArgs) -> CliResult<()> {
    let dir = out_dir(&args.output)?;
    let mut cfg: ScheduleConfig = match args.output.config.as_ref() {
        Some(p) => load_config(p)?,
        None => ScheduleConfig {
            schedule: resolve_schedule(args.kind.as_deref(), args.beta2, args.tau)?,
            t_max: 3000,
            effective_period: false,
            tolerance: 1e-8,
        },
    };
    if args.output.config.is_some() && (args.kind.is_some() || args.beta2.is_some() || args.tau.is_some())
    {
        cfg.schedule = resolve_schedule(args.kind.as_deref(), args.beta2, args.tau)?;
    }
    if let Some(v) = args.t_max {
        cfg.t_max = v;
    }
    if args.effective_period {
        cfg.effective_period = true;
    }
    if let Some(v) = args.tolerance {
        cfg.tolerance = v;
    }
    if cfg.t_max == 0 {
        return Err(usage("--t-max must be at least 1"));
    }

    let mut csv = String::from("t,omega\n");
    for t in 1..=cfg.t_max {
        csv.push_str(&format!("{t},{:.8e}\n", cfg.schedule.factor(t)));
    }
    write_file(&dir, "schedule.csv", csv.as_bytes())?;
    write_manifest(&dir, "schedule", 0, &cfg, &["schedule.csv"])?;
    println!(
        "schedule: {} over t in [1, {}] -> {}",
        cfg.schedule.name(),
        cfg.t_max,
        dir.join("schedule.csv").display()
    );
    if cfg.effective_period {
        let period =
            effective_warmup_period(&cfg.schedule, cfg.tolerance).map_err(anyhow::Error::from)?;
        println!("effective warmup period ({}): {period}", cfg.schedule.name());
    }
    Ok(())
}

fn cmd_fact1(args: Fact1Args) -> CliResult<()> {
    let dir = out_dir(&args.output)?;
    let cfg: Fact1Config = match args.output.config.as_ref() {
        Some(p) => load_config(p)?,
        None => {
            let t_max = args.t_max.unwrap_or(100_000);
            let grid = match (args.beta2_min, args.beta2_step) {
                (None, None) => fact1_default_grid(),
                (min, step) => {
                    let min = min.unwrap_or(0.8);
                    let step = step.unwrap_or(1e-3);
                    if !(step > 0.0) {
                        return Err(usage("--beta2-step must be positive"));
                    }
                    let mut grid = Vec::new();
                    let mut i = 0u64;
                    loop {
                        let b2 = min + i as f64 * step;
                        if b2 >= 1.0 {
                            break;
                        }
                        grid.push(b2);
                        i += 1;
                    }
                    grid
                }
            };
            Fact1Config { beta2_grid: grid, t_max }
        }
    };

    let report = verify_fact1(&cfg.beta2_grid, cfg.t_max).map_err(|e| match e {
        CoreError::InvalidArgument(_) => usage_from(e),
        other => CliError::Runtime(other.into()),
    })?;

    let summary = match &report.counterexample {
        None => format!(
            "verified: rho_t <= 4 iff t <= 4 over {} beta2 values, t in [1, {}]\n",
            report.grid_len, report.t_max
        ),
        Some(c) => format!(
            "counterexample: beta2 = {}, t = {}, rho_t = {}\n",
            c.beta2, c.t, c.rho_t
        ),
    };
    write_file(&dir, "fact1-report.txt", summary.as_bytes())?;
    write_manifest(&dir, "fact1", 0, &cfg, &["fact1-report.txt"])?;
    print!("{summary}");
    if !report.verified() {
        return Err(CliError::Runtime(anyhow::anyhow!(
            "momentum-phase boundary sweep found a counterexample"
        )));
    }
    Ok(())
}

fn resolve_optimizer(name: &str) -> CliResult<OptimizerKind> {
    match name {
        "adam" => Ok(OptimizerKind::Adam),
        "radam" => Ok(OptimizerKind::Radam),
        "sgd" => Ok(OptimizerKind::Sgd),
        other => Err(usage(format!(
            "unknown optimizer '{other}' (expected adam, radam, or sgd)"
        ))),
    }
}

fn resolve_warmup(name: &str, beta2: f64, tau: Option<f64>) -> CliResult<WarmupSchedule> {
    match name {
        "none" | "constant" => Ok(WarmupSchedule::ConstantOne),
        _ => resolve_schedule(Some(name), Some(beta2), tau),
    }
}

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let dir = out_dir(&args.output)?;
    let mut cfg: TrainCliConfig = match args.output.config.as_ref() {
        Some(p) => load_config(p)?,
        None => {
            let images = args
                .images
                .clone()
                .ok_or_else(|| usage("--images is required (or provide --config)"))?;
            let labels = args
                .labels
                .clone()
                .ok_or_else(|| usage("--labels is required (or provide --config)"))?;
            TrainCliConfig {
                images,
                labels,
                train: TrainConfig::default(),
                compare_warmups: false,
                compare_seeds: 3,
            }
        }
    };
    if let Some(v) = args.images.clone() {
        cfg.images = v;
    }
    if let Some(v) = args.labels.clone() {
        cfg.labels = v;
    }
    if let Some(v) = args.alpha {
        cfg.train.hp.alpha = v;
    }
    if let Some(v) = args.beta1 {
        cfg.train.hp.beta1 = v;
    }
    if let Some(v) = args.beta2 {
        cfg.train.hp.beta2 = v;
    }
    if let Some(v) = args.epsilon {
        cfg.train.hp.epsilon = v;
    }
    if let Some(v) = args.weight_decay {
        cfg.train.hp.weight_decay = v;
    }
    if let Some(v) = args.batch {
        cfg.train.batch_size = v;
    }
    if let Some(v) = args.iters {
        cfg.train.n_iters = v;
    }
    if let Some(v) = args.seed {
        cfg.train.seed = v;
    }
    if let Some(name) = args.optimizer.as_deref() {
        cfg.train.optimizer = resolve_optimizer(name)?;
    }
    if let Some(name) = args.warmup.as_deref() {
        cfg.train.warmup = resolve_warmup(name, cfg.train.hp.beta2, args.tau)?;
    }
    if args.probe || args.probe_every.is_some() || args.probe_samples.is_some() || args.probe_params.is_some()
    {
        let mut probe = cfg.train.probe.clone().unwrap_or_default();
        if let Some(v) = args.probe_every {
            probe.every = v;
        }
        if let Some(v) = args.probe_samples {
            probe.grad_samples = v;
        }
        if let Some(v) = args.probe_params {
            probe.params_per_matrix = v;
        }
        cfg.train.probe = Some(probe);
    }
    if args.compare_warmups {
        cfg.compare_warmups = true;
    }
    if let Some(v) = args.seeds {
        if v == 0 {
            return Err(usage("--seeds must be at least 1"));
        }
        cfg.compare_seeds = v;
    }

    let dataset = load_idx(&cfg.images, &cfg.labels).map_err(anyhow::Error::from)?;
    cfg.train.validate(&dataset).map_err(usage_from)?;

    if cfg.compare_warmups {
        let seeds: Vec<u64> = (0..cfg.compare_seeds).map(|i| cfg.train.seed + i).collect();
        let report = compare_warmups(&dataset, &cfg.train, &seeds).map_err(anyhow::Error::from)?;
        let mut csv = Vec::new();
        write_compare_csv(&report, &mut csv).context("formatting comparison CSV")?;
        write_file(&dir, "compare.csv", &csv)?;
        write_manifest(&dir, "train", cfg.train.seed, &cfg, &["compare.csv"])?;

        println!("final full-dataset loss by method and seed:");
        for cell in &report.cells {
            println!("  {:<15} seed {:<3} {:.6}", cell.method, cell.seed, cell.final_loss);
        }
        for (i, name) in report.method_names.iter().enumerate() {
            println!(
                "  {:<15} mean {:.6} std {:.6}",
                name, report.mean_final[i], report.std_final[i]
            );
        }
        println!("cross-method spread of means: {:.6}", report.cross_method_spread);
        println!("max cross-seed std:           {:.6}", report.max_seed_std);
        return Ok(());
    }

    let outcome = train(&cfg.train, &dataset).map_err(anyhow::Error::from)?;

    let mut loss_csv = Vec::new();
    write_loss_csv(&outcome.loss_curve, &mut loss_csv).context("formatting loss CSV")?;
    write_file(&dir, "loss.csv", &loss_csv)?;
    let mut outputs = vec!["loss.csv", "model.json", "optimizer.json"];
    if !outcome.probes.is_empty() {
        let mut probe_csv = Vec::new();
        write_probe_csv(&outcome.probes, &mut probe_csv).context("formatting probe CSV")?;
        write_file(&dir, "probe.csv", &probe_csv)?;
        outputs.push("probe.csv");
    }
    save_model(&dir.join("model.json"), &outcome.model).map_err(anyhow::Error::from)?;
    warmlab::optim::save_checkpoint(&dir.join("optimizer.json"), &outcome.optimizer_checkpoint)
        .map_err(anyhow::Error::from)?;
    write_manifest(&dir, "train", cfg.train.seed, &cfg, &outputs)?;

    println!(
        "train: {} iterations, {} -> {}",
        cfg.train.n_iters,
        cfg.train.optimizer.name(),
        dir.display()
    );
    println!("initial full-dataset loss: {:.6}", outcome.initial_loss);
    println!("final full-dataset loss:   {:.6}", outcome.final_loss);
    if let Some(first) = outcome.probes.first() {
        println!(
            "first probe (t={}): median_cv {:.4}, moment_corr {:.4}, median |update|/alpha {:.4}",
            first.t, first.median_cv, first.moment_correlation, first.median_update_magnitude
        );
    }
    Ok(())
}

fn cmd_dataset(args: DatasetArgs) -> CliResult<()> {
    let dir = out_dir(&args.output)?;
    let mut cfg: DatasetConfig = load_config_or(
        args.output.config.as_ref(),
        DatasetConfig { n: 4096, size: 14, seed: 0 },
    )?;
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.size {
        cfg.size = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }

    let dataset = synthetic_digits(cfg.n, cfg.size, cfg.seed).map_err(usage_from)?;
    let images = warmlab::train::encode_idx_images(
        &dataset.images,
        dataset.n_images,
        dataset.height,
        dataset.width,
    );
    let labels = warmlab::train::encode_idx_labels(&dataset.labels);
    write_file(&dir, "images-idx3-ubyte", &images)?;
    write_file(&dir, "labels-idx1-ubyte", &labels)?;
    write_manifest(
        &dir,
        "dataset",
        cfg.seed,
        &cfg,
        &["images-idx3-ubyte", "labels-idx1-ubyte"],
    )?;
    println!(
        "dataset: {} synthetic digit images ({}x{}) -> {}",
        cfg.n,
        cfg.size,
        cfg.size,
        dir.display()
    );
    Ok(())
}
