use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;

mod commands;
mod config;
mod error;
mod output;

use config::{ExperimentConfig, Format};
use error::CliError;
use output::OutputDir;

/// Twisted conjugacies and invariant tori of near-integrable Hamiltonians.
#[derive(Debug, Parser)]
#[command(name = "kam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random suites (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Emit only this format (overrides `output.formats`).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Flatten, run the outer loop on the actions and verify the torus.
    Solve,
    /// Twisted conjugacy `H = K o G + beta . r` only.
    Herman,
    /// Round trip and explicit bound for the cohomological equation.
    Cohomology,
    /// Brute-force Diophantine constant of `alpha`.
    Diophantine,
    /// Convergence criterion for an approximation function.
    Arithmetics,
    /// Seeded property suites; exit code 4 on any failure.
    Verify,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    command: Command,
    version: &'static str,
    seed: u64,
    threads: usize,
    config: Option<String>,
    started_unix: f64,
    elapsed_seconds: f64,
    artifacts: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a CliError>,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.formats = vec![f];
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::config("threads", "--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::config("threads", e.to_string()))?;
    }
    let mut out = OutputDir::create(&cfg.output.directory)?;
    let (started, clock) = (unix_now(), Instant::now());
    let result = match cli.command {
        Command::Solve => commands::cmd_solve(&cfg, &mut out),
        Command::Herman => commands::cmd_herman(&cfg, &mut out),
        Command::Cohomology => commands::cmd_cohomology(&cfg, &mut out),
        Command::Diophantine => commands::cmd_diophantine(&cfg, &mut out),
        Command::Arithmetics => commands::cmd_arithmetics(&cfg, &mut out),
        Command::Verify => commands::cmd_verify(&cfg, &mut out),
    };
    if let Err(e) = &result {
        out.write_json("error.json", e)?;
    }
    let artifacts = out.written().to_vec();
    let meta = RunMeta {
        command: cli.command,
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        threads: rayon::current_num_threads(),
        config: cli.config.as_ref().map(|p| p.display().to_string()),
        started_unix: started,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        artifacts: &artifacts,
        error: result.as_ref().err(),
    };
    out.write_json("run_meta.json", &meta)?;
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let err = CliError::config("arguments", e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit)
        }
    }
}
