//! `armpose`: synthesize, solve, refine, evaluate and reach from the shell.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit code 2.
    Usage(String),
    /// The pipeline refused the input; exit code 1.
    Domain(armpose::Error),
}

impl From<armpose::Error> for CliError {
    fn from(e: armpose::Error) -> Self {
        CliError::Domain(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "armpose", version, about = "3D pose estimation, label refinement and reaching for a 4-joint desktop arm")]
struct Cli {
    /// TOML file with defaults for any flag; flags on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output format on stdout.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset of annotations and heatmaps.
    Synth(commands::SynthArgs),
    /// Fit the pose to one set of 2D keypoints.
    Solve(commands::SolveArgs),
    /// Turn a directory of heatmaps into geometry-consistent pseudo-labels.
    Refine(commands::RefineArgs),
    /// Score predicted annotations against ground truth.
    Eval(commands::EvalArgs),
    /// Run reaching episodes in the simulator.
    Reach(commands::ReachArgs),
    /// Synthesize, refine, evaluate and reach in one go.
    Demo(commands::DemoArgs),
}

fn run(cli: Cli) -> Result<String, CliError> {
    let cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => config::ConfigFile::default(),
    };
    let format = match (cli.format, cfg.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some(name)) => Format::from_str(name, true).map_err(|_| CliError::Usage(format!("config: unknown format `{name}`")))?,
        (None, None) => Format::Json,
    };
    let workers = cli.workers.or(cfg.workers);
    log::debug!("workers {workers:?}, format {format:?}");
    armpose::exec::with_workers(workers, || match cli.command {
        Command::Synth(a) => commands::synth(config::merge(a, cfg.synth.as_ref())?, format),
        Command::Solve(a) => commands::solve(config::merge(a, cfg.solve.as_ref())?, format),
        Command::Refine(a) => commands::refine(config::merge(a, cfg.refine.as_ref())?, format),
        Command::Eval(a) => commands::eval(config::merge(a, cfg.eval.as_ref())?, format),
        Command::Reach(a) => commands::reach(config::merge(a, cfg.reach.as_ref())?, format),
        Command::Demo(a) => commands::demo(config::merge(a, cfg.demo.as_ref())?, format),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            let body = serde_json::json!({ "error": { "code": e.code(), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::from(1)
        }
    }
}
