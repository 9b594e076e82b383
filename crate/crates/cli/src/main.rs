//! Command-line front end: wires run configurations to the library engines
//! and emits result tables.
//!
//! Exit codes: 0 on success, 1 on a runtime (engine or I/O) error, 2 on a
//! configuration error. Identical configs and seeds produce byte-identical
//! output files.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{CommandOutput, RuntimeError};
use config::{ConfigError, Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "repgas",
    version,
    about = "Densities, pressures, and zero-free certificates for repulsive gasses"
)]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; overrides the config's output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: csv or jsonl; overrides the config.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Sampler seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread count; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the temperedness constant and the critical activity.
    Cphi,
    /// Certify a zero-free complex neighborhood of [0, lambda0].
    Certify {
        /// Segment endpoint; defaults to the configured activity.
        #[arg(long)]
        lambda0: Option<f64>,
        /// Verification grid resolution per axis.
        #[arg(long, default_value_t = 40)]
        grid: usize,
    },
    /// Recursion density profile at the probe point.
    Density {
        /// Truncation depth; defaults to the configured depth.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Finite-volume pressure and density by both engines.
    Pressure,
    /// Roots of the truncated partition polynomial.
    Zeros,
    /// Truncated-series partition function with per-order coefficients.
    Oracle,
    /// Birth-death Monte Carlo run.
    Mc,
    /// Three-way density comparison: recursion, oracle, sampler.
    Compare,
}

enum AppError {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e.0)
    }
}

impl From<RuntimeError> for AppError {
    fn from(e: RuntimeError) -> Self {
        AppError::Runtime(e.0)
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, AppError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| AppError::Config("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(fmt) = &cli.format {
        cfg.format = Format::parse(fmt)?;
    }
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    Ok(cfg)
}

fn emit(cfg: &RunConfig, out: CommandOutput) -> Result<(), AppError> {
    print!("{}", out.summary);
    let payload = match (&out.table, &out.text) {
        (Some(table), _) => Some(table.render(cfg.format)),
        (None, Some(text)) => Some(text.clone()),
        (None, None) => None,
    };
    match (&cfg.out, payload) {
        (Some(path), Some(content)) => std::fs::write(path, content)
            .map_err(|e| AppError::Runtime(format!("cannot write {}: {e}", path.display()))),
        (None, Some(content)) => {
            if out.table.is_some() {
                print!("{content}");
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn dispatch(cli: &Cli) -> Result<(), AppError> {
    let cfg = load_config(cli)?;
    let out = match &cli.command {
        Command::Cphi => commands::cmd_cphi(&cfg)?,
        Command::Certify { lambda0, grid } => commands::cmd_certify(&cfg, *lambda0, *grid)?,
        Command::Density { depth } => commands::cmd_density(&cfg, *depth)?,
        Command::Pressure => commands::cmd_pressure(&cfg)?,
        Command::Zeros => commands::cmd_zeros(&cfg)?,
        Command::Oracle => commands::cmd_oracle(&cfg)?,
        Command::Mc => commands::cmd_mc(&cfg)?,
        Command::Compare => commands::cmd_compare(&cfg)?,
    };
    emit(&cfg, out)
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    let code = match dispatch(&cli) {
        Ok(()) => 0,
        Err(AppError::Config(msg)) => {
            eprintln!("config error: {msg}");
            2
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    };
    std::process::exit(code);
}
