//! `rvcap`: realized volatility, long memory and capital requirements from
//! intraday futures prices.

mod analysis;
mod commands;
mod config;
mod output;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{
    CapitalOpts, IngestOpts, InputOpts, MemoryOpts, OutputOpts, RunConfig, SimulateOpts, StatsOpts,
};
use output::Run;

#[derive(Parser)]
#[command(
    name = "rvcap",
    version,
    about = "Realized volatility and minimum capital requirements"
)]
struct Cli {
    /// TOML config file, or a manifest JSON from an earlier run. Flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Snap interval prices onto the contract grid (writes `date,slot,price,filled`)
    Ingest {
        #[command(flatten)]
        ingest: IngestOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Daily return and realized measures, one series CSV each
    Rv {
        #[command(flatten)]
        inputs: InputOpts,
        #[command(flatten)]
        ingest: IngestOpts,
        #[command(flatten)]
        stats: StatsOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Summary statistics, percentiles and box-plot numbers for one series
    Stats {
        #[command(flatten)]
        inputs: InputOpts,
        #[command(flatten)]
        stats: StatsOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Ljung-Box, log-periodogram and scaling-law memory estimates
    Memory {
        #[command(flatten)]
        inputs: InputOpts,
        #[command(flatten)]
        memory: MemoryOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Long, short and gaussian minimum capital requirements
    Capital {
        #[command(flatten)]
        inputs: InputOpts,
        #[command(flatten)]
        capital: CapitalOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Synthetic prices or fractional noise with known properties
    Simulate {
        #[command(flatten)]
        simulate: SimulateOpts,
        #[command(flatten)]
        ingest: IngestOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Full chain from prices to capital requirements in one document
    Report {
        #[command(flatten)]
        inputs: InputOpts,
        #[command(flatten)]
        ingest: IngestOpts,
        #[command(flatten)]
        stats: StatsOpts,
        #[command(flatten)]
        memory: MemoryOpts,
        #[command(flatten)]
        capital: CapitalOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
}

/// A failure reported as `error: <category>: <detail>` with a mapped exit code.
#[derive(Debug)]
pub struct CliError {
    category: String,
    detail: String,
    code: u8,
}

impl CliError {
    pub fn usage(category: &str, detail: impl Into<String>) -> Self {
        Self {
            category: category.into(),
            detail: detail.into(),
            code: 1,
        }
    }

    pub fn numeric(category: &str, detail: impl Into<String>) -> Self {
        Self {
            category: category.into(),
            detail: detail.into(),
            code: 3,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        let category = match e.kind() {
            std::io::ErrorKind::NotFound => "io.not_found",
            std::io::ErrorKind::PermissionDenied => "io.permission_denied",
            _ => "io.other",
        };
        Self {
            category: category.into(),
            detail: format!("{}: {e}", path.display()),
            code: 2,
        }
    }
}

impl From<rvcap::Error> for CliError {
    fn from(e: rvcap::Error) -> Self {
        let category = e.category();
        let code = match category.split('.').next() {
            Some("usage") => 1,
            Some("numeric") => 3,
            _ => 2,
        };
        Self {
            category: category.into(),
            detail: e.to_string(),
            code,
        }
    }
}

type CommandFn = fn(&mut Run) -> Result<(), CliError>;

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (name, flags, run_fn): (&'static str, RunConfig, CommandFn) = match cli.command {
        Command::Ingest { ingest, output } => (
            "ingest",
            RunConfig {
                ingest,
                output,
                ..Default::default()
            },
            commands::ingest,
        ),
        Command::Rv {
            inputs,
            ingest,
            stats,
            output,
        } => (
            "rv",
            RunConfig {
                inputs,
                ingest,
                stats,
                output,
                ..Default::default()
            },
            commands::rv,
        ),
        Command::Stats {
            inputs,
            stats,
            output,
        } => (
            "stats",
            RunConfig {
                inputs,
                stats,
                output,
                ..Default::default()
            },
            commands::stats,
        ),
        Command::Memory {
            inputs,
            memory,
            output,
        } => (
            "memory",
            RunConfig {
                inputs,
                memory,
                output,
                ..Default::default()
            },
            commands::memory,
        ),
        Command::Capital {
            inputs,
            capital,
            output,
        } => (
            "capital",
            RunConfig {
                inputs,
                capital,
                output,
                ..Default::default()
            },
            commands::capital,
        ),
        Command::Simulate {
            simulate,
            ingest,
            output,
        } => (
            "simulate",
            RunConfig {
                simulate,
                ingest,
                output,
                ..Default::default()
            },
            commands::simulate,
        ),
        Command::Report {
            inputs,
            ingest,
            stats,
            memory,
            capital,
            output,
        } => (
            "report",
            RunConfig {
                inputs,
                ingest,
                stats,
                memory,
                capital,
                output,
                simulate: Default::default(),
            },
            commands::report,
        ),
    };
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.overlay(&flags);
    let mut run = Run::new(name, cfg);
    run_fn(&mut run)?;
    run.commit()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or_default();
            eprintln!(
                "error: usage.invalid_arguments: {}",
                first.trim_start_matches("error: ")
            );
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.category, e.detail.replace('\n', " "));
            ExitCode::from(e.code)
        }
    }
}
