//! `vortexcrit` — pipeline driver for the two-ring collision diagnostics.
//!
//! Subcommands: `generate`, `evolve`, `analyze`, `harmonic`, `verdict`,
//! `all`. Every command takes `--config` (TOML, sections per module) and
//! writes its artifacts plus an append-only `manifest.jsonl` into the
//! output directory. Exit codes: 0 success, 2 configuration error,
//! 3 numeric/convergence error, 4 I/O error.

mod commands;
mod config;
mod error;
mod manifest;
mod timeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::CliResult;

#[derive(Parser)]
#[command(name = "vortexcrit", version, about = "Vortex-ring collision criticality diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `solver.output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for any randomized sampling (recorded in the manifest).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the two-ring initial vorticity and write initial.slf1.
    Generate(Common),
    /// Integrate the initial field, storing snapshots and diagnostics.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Continue the timeline in the output directory from its last
        /// stored snapshot.
        #[arg(long)]
        resume: bool,
    },
    /// Sparseness, volume-decay and oscillation reports for a timeline.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Timeline directory (defaults to the output directory).
        #[arg(long)]
        timeline: Option<PathBuf>,
    },
    /// Harmonic-measure table over an α grid (closed form vs numeric).
    Harmonic(Common),
    /// Criticality verdict for a stored timeline.
    Verdict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        timeline: Option<PathBuf>,
    },
    /// Full pipeline: generate, evolve, analyze, verdict.
    All(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Generate(c) | Command::Harmonic(c) | Command::All(c) => c,
            Command::Evolve { common, .. }
            | Command::Analyze { common, .. }
            | Command::Verdict { common, .. } => common,
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let common = cli.command.common();
    if let Some(threads) = common.threads {
        // A second build_global (e.g. in tests) is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let cfg = Config::load(&common.config)?;
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.solver.output_dir));
    let config_path = common.config.clone();
    let seed = common.seed;

    match &cli.command {
        Command::Generate(_) => {
            commands::cmd_generate(&cfg, &config_path, &out, seed)?;
        }
        Command::Evolve { resume, .. } => {
            commands::cmd_evolve(&cfg, &config_path, &out, seed, *resume)?;
        }
        Command::Analyze { timeline, .. } => {
            let tdir = timeline.clone().unwrap_or_else(|| out.clone());
            commands::cmd_analyze(&cfg, &config_path, &tdir, &out, seed)?;
        }
        Command::Harmonic(_) => {
            commands::cmd_harmonic(&cfg, &config_path, &out, seed)?;
        }
        Command::Verdict { timeline, .. } => {
            let tdir = timeline.clone().unwrap_or_else(|| out.clone());
            commands::cmd_verdict(&cfg, &config_path, &tdir, &out, seed)?;
        }
        Command::All(_) => {
            commands::cmd_all(&cfg, &config_path, &out, seed)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
