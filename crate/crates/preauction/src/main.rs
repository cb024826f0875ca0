use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use preauction::config::parse_config;
use preauction::parallel::worker_count;
use preauction::{emit_report, run_command, Command, RunConfig};
use preauction_core::ValueDistribution;

/// Equilibrium analysis of pre-auction cheap talk with a seller who cannot
/// commit. Writes `report.json` and plot data into the output directory.
#[derive(Debug, Parser)]
#[command(name = "preauction", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// INI configuration; optional for `example`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    draws: Option<u64>,
    /// Threshold for `simulate` and `verify`.
    #[arg(long)]
    tau: Option<f64>,
}

/// Exit status for runs that completed but failed a check.
const CHECKS_FAILED: u8 = 1;
/// Exit status for configuration, numerical or I/O errors.
const ERROR: u8 = 2;

fn load(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None if cli.command == Command::Example => RunConfig::example(),
        None => return Err("--config is required".into()),
    };
    if let Some(seed) = cli.seed {
        cfg.simulate.seed = seed;
    }
    if let Some(draws) = cli.draws {
        if draws < preauction_core::sim::MIN_DRAWS {
            return Err(format!("--draws must be at least {}", preauction_core::sim::MIN_DRAWS));
        }
        cfg.simulate.draws = draws;
    }
    if let Some(tau) = cli.tau {
        let f = cfg.prior();
        if !(tau > f.lo() && tau < f.hi()) {
            return Err(format!("--tau must lie in ({}, {})", f.lo(), f.hi()));
        }
        cfg.simulate.tau = Some(tau);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ERROR);
        }
    };
    let outcome = match run_command(cli.command, &cfg, worker_count()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ERROR);
        }
    };
    if let Err(e) = emit_report(&outcome.report, &outcome.artifacts, &cli.out) {
        eprintln!("error: {e}");
        return ExitCode::from(ERROR);
    }
    for c in &outcome.report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    println!("wrote {}", cli.out.join("report.json").display());
    if cli.command.gated() && !outcome.report.passed {
        return ExitCode::from(CHECKS_FAILED);
    }
    ExitCode::SUCCESS
}
