//! `robolearn` — train, evaluate and replay the three robot-learning tasks.

mod manifest;
mod run;

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use log::warn;
use rayon::prelude::*;

use robolearn::tasks::{builtin_preset, ExperimentConfig};
use robolearn::worldsim::{builtin_map_names, serialize_map};

use manifest::RunKind;
use run::{canonical_map_specs, execute, replay, RunSpec};

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation; exit status 2.
    Usage(String),
    /// Config, map, IO or simulation failure; exit status 1.
    Runtime(String),
}

impl From<robolearn::Error> for CliError {
    fn from(e: robolearn::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "robolearn", version, about = "Tabular Q-learning for a simulated two-wheeled robot")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a Q-table from a config (runs the map curriculum when several maps are listed).
    Train(TrainArgs),
    /// Run the greedy policy of a trained table without learning.
    Eval(EvalArgs),
    /// Re-execute a run from its manifest and check the outputs are identical.
    Replay {
        manifest: PathBuf,
    },
    /// Inspect the packaged maps.
    Maps {
        #[command(subcommand)]
        command: MapsCommand,
    },
}

#[derive(Subcommand)]
enum MapsCommand {
    List,
    /// Print a map (built-in name or file path) as JSON.
    Show { name: String },
}

// Single-valued flags are collected as lists so a repeated flag can win
// with a warning instead of failing the parse.
#[derive(Args)]
struct CommonArgs {
    /// Experiment config file; bare preset names such as task2.json also work.
    #[arg(long, required = true, action = ArgAction::Append, value_name = "PATH")]
    config: Vec<PathBuf>,
    #[arg(long, action = ArgAction::Append, value_name = "N")]
    seed: Vec<u64>,
    #[arg(long = "qtable-in", action = ArgAction::Append, value_name = "PATH")]
    qtable_in: Vec<PathBuf>,
    #[arg(long = "metrics-out", action = ArgAction::Append, value_name = "PATH")]
    metrics_out: Vec<PathBuf>,
    /// Base directory for outputs not given explicitly [default: runs/<task>-seed<N>]
    #[arg(long = "out-dir", action = ArgAction::Append, value_name = "DIR")]
    out_dir: Vec<PathBuf>,
    /// Number of consecutive seeds to run, starting at --seed.
    #[arg(long, action = ArgAction::Append, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    runs: Vec<u64>,
    /// Worker threads for --runs.
    #[arg(long, action = ArgAction::Append, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Vec<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long = "qtable-out", action = ArgAction::Append, value_name = "PATH")]
    qtable_out: Vec<PathBuf>,
    #[arg(long, action = ArgAction::Append, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    epochs: Vec<u64>,
    #[arg(long, action = ArgAction::Append, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    steps: Vec<u64>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Greedy episodes per map [default: 5]
    #[arg(long, action = ArgAction::Append, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    episodes: Vec<u64>,
}

fn last<T: Clone + Display>(flag: &str, values: &[T]) -> Option<T> {
    if values.len() > 1 {
        let all: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        warn!("--{flag} given {} times ({}); using the last", values.len(), all.join(", "));
    }
    values.last().cloned()
}

fn last_path(flag: &str, values: &[PathBuf]) -> Option<PathBuf> {
    let shown: Vec<_> = values.iter().map(|p| p.display().to_string()).collect();
    last(flag, &shown).map(PathBuf::from)
}

/// Reads a config: the path itself, else the same file name in
/// `$ROBOLEARN_PRESETS`, else a packaged preset of that name. Returns the
/// text and the directory relative paths inside it resolve against.
fn read_config(path: &Path) -> Result<(String, PathBuf), CliError> {
    let cwd = std::env::current_dir().map_err(|e| CliError::Runtime(format!("current directory: {e}")))?;
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(|d| cwd.join(d)).unwrap_or_else(|| cwd.clone());
        return Ok((text, dir));
    }
    let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    if let Some(dir) = std::env::var_os("ROBOLEARN_PRESETS") {
        let candidate = PathBuf::from(dir).join(file_name);
        if candidate.is_file() {
            let text = std::fs::read_to_string(&candidate)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", candidate.display())))?;
            let dir = candidate.parent().map(|d| cwd.join(d)).unwrap_or_else(|| cwd.clone());
            return Ok((text, dir));
        }
    }
    match builtin_preset(file_name) {
        Some(text) => Ok((text.to_owned(), cwd)),
        None => Err(CliError::Runtime(format!("config {}: no such file or preset", path.display()))),
    }
}

fn absolute(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

struct Plan {
    specs: Vec<RunSpec>,
    jobs: usize,
}

fn plan(kind: RunKind, common: &CommonArgs, train: Option<&TrainArgs>, episodes: usize) -> Result<Plan, CliError> {
    let config_path = last_path("config", &common.config).expect("clap enforces --config");
    let (text, base) = read_config(&config_path)?;
    let mut config = ExperimentConfig::from_json(&config_path.display().to_string(), &text)?;
    let cwd = std::env::current_dir().map_err(|e| CliError::Runtime(format!("current directory: {e}")))?;

    if let Some(seed) = last("seed", &common.seed) {
        config.seed = seed;
    }
    if let Some(t) = train {
        let mut hp = config.hyperparams();
        if let Some(e) = last("epochs", &t.epochs) {
            hp.epochs = e as usize;
        }
        if let Some(s) = last("steps", &t.steps) {
            hp.steps_per_epoch = s as usize;
        }
        config.hyperparams = Some(hp);
    }
    config.maps = Some(canonical_map_specs(&config.map_names(), &base)?);

    let qtable_in = last_path("qtable-in", &common.qtable_in)
        .map(|p| absolute(&cwd, &p))
        .or_else(|| config.qtable_in.as_ref().map(|p| absolute(&base, p)));
    if kind == RunKind::Eval && qtable_in.is_none() {
        return Err(CliError::Usage("eval requires --qtable-in <PATH>".into()));
    }
    let metrics_out = last_path("metrics-out", &common.metrics_out)
        .map(|p| absolute(&cwd, &p))
        .or_else(|| config.metrics_out.as_ref().map(|p| absolute(&base, p)));
    let qtable_out = train
        .and_then(|t| last_path("qtable-out", &t.qtable_out))
        .map(|p| absolute(&cwd, &p))
        .or_else(|| config.qtable_out.as_ref().map(|p| absolute(&base, p)));
    let out_dir = last_path("out-dir", &common.out_dir).map(|p| absolute(&cwd, &p));
    // outputs live in the manifest, not the config
    config.qtable_in = None;
    config.qtable_out = None;
    config.metrics_out = None;

    let runs = last("runs", &common.runs).unwrap_or(1);
    let jobs = last("jobs", &common.jobs).unwrap_or(1) as usize;
    let mut specs = Vec::new();
    for k in 0..runs {
        let mut cfg = config.clone();
        cfg.seed = config.seed + k;
        let suffix = if kind == RunKind::Eval { "-eval" } else { "" };
        let default_dir = cwd.join("runs").join(format!("{}-seed{}{suffix}", cfg.task, cfg.seed));
        let sub = |p: PathBuf| -> PathBuf {
            if runs == 1 {
                p
            } else {
                let name = p.file_name().map(|n| n.to_owned()).unwrap_or_default();
                p.parent().unwrap_or(Path::new("")).join(format!("seed-{}", cfg.seed)).join(name)
            }
        };
        let dir = match &out_dir {
            Some(d) if runs > 1 => d.join(format!("seed-{}", cfg.seed)),
            Some(d) => d.clone(),
            None => default_dir,
        };
        specs.push(RunSpec {
            kind,
            episodes,
            qtable_in: qtable_in.clone(),
            metrics_csv: metrics_out.clone().map(&sub).unwrap_or_else(|| dir.join("metrics.csv")),
            qtable_out: match kind {
                RunKind::Train => Some(qtable_out.clone().map(&sub).unwrap_or_else(|| dir.join("qtable.json"))),
                RunKind::Eval => None,
            },
            config: cfg,
        });
    }
    Ok(Plan { specs, jobs })
}

fn run_plan(plan: Plan) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| plan.specs.par_iter().map(|s| (s, execute(s))).collect());
    let mut failed = None;
    for (spec, res) in results {
        match res {
            Ok(r) => println!(
                "{} seed {}: {} records -> {} (manifest {})",
                spec.config.task,
                spec.config.seed,
                r.records.len(),
                spec.metrics_csv.display(),
                r.manifest_path.display()
            ),
            Err(e) => {
                eprintln!("{} seed {}: {}", spec.config.task, spec.config.seed, message(&e));
                failed.get_or_insert(e);
            }
        }
    }
    failed.map_or(Ok(()), Err)
}

fn message(e: &CliError) -> &str {
    match e {
        CliError::Usage(m) | CliError::Runtime(m) => m,
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(args) => run_plan(plan(RunKind::Train, &args.common, Some(&args), 1)?),
        Command::Eval(args) => {
            let episodes = last("episodes", &args.episodes).unwrap_or(5) as usize;
            run_plan(plan(RunKind::Eval, &args.common, None, episodes)?)
        }
        Command::Replay { manifest } => {
            println!("{}", replay(&manifest)?);
            Ok(())
        }
        Command::Maps { command } => {
            match command {
                MapsCommand::List => {
                    for name in builtin_map_names() {
                        println!("{name}");
                    }
                }
                MapsCommand::Show { name } => {
                    let (map, _) = robolearn::tasks::load_map(&name, None)?;
                    print!("{}", serialize_map(&map));
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(1)
        }
    }
}
