//! `ladder`: parameter sweeps over the frustrated Ising ladder, written as CSV.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use config::{CommandName, Overrides, RunConfig};
use output::{write_csv, Metadata};

#[derive(Parser)]
#[command(name = "ladder", version, about = "Frustrated Ising ladder sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-state observables on a parameter grid.
    PhaseEd(Common),
    /// Energy gap along the transverse field, with located minima.
    GapScan(Common),
    /// Exponential fit of the minimum gap against ladder length.
    GapScaling(Common),
    /// Dimer-limit RG trajectory.
    RgFlow(Common),
    /// Dimer-limit RG phase boundary.
    RgBoundary(Common),
    /// Large-U chain RG boundary and flow classification.
    ChainRg(Common),
    /// Dimer ground-space census and level crossings.
    Dimer(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Eigensolver residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_FAILED: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let (name, common) = match cli.command {
        Command::PhaseEd(c) => (CommandName::PhaseEd, c),
        Command::GapScan(c) => (CommandName::GapScan, c),
        Command::GapScaling(c) => (CommandName::GapScaling, c),
        Command::RgFlow(c) => (CommandName::RgFlow, c),
        Command::RgBoundary(c) => (CommandName::RgBoundary, c),
        Command::ChainRg(c) => (CommandName::ChainRg, c),
        Command::Dimer(c) => (CommandName::Dimer, c),
    };
    let overrides = Overrides {
        out: common.out,
        seed: common.seed,
        workers: common.workers,
        tol: common.tol,
    };
    let loaded = match &common.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let cfg = match loaded.and_then(|c| c.resolve(name, &overrides)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(n) = cfg.workers {
        ladder_core::par::configure_workers(n);
    }

    let table = commands::run(name, &cfg);

    let meta = Metadata {
        version: env!("CARGO_PKG_VERSION"),
        command: name.as_str(),
        seed: cfg.seed(),
        config_hash: cfg.hash(),
        config_json: {
            let mut shown = cfg.clone();
            shown.out = None;
            shown.workers = None;
            shown.to_json()
        },
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let written = match &cfg.out {
        Some(path) => std::fs::File::create(path).and_then(|f| {
            let mut w = std::io::BufWriter::new(f);
            write_csv(&mut w, &meta, &table)?;
            w.flush()
        }),
        None => write_csv(std::io::stdout().lock(), &meta, &table),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write results: {e}");
        return ExitCode::from(EXIT_FAILED);
    }

    let failed = table.failed_rows();
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{failed} of {} rows failed", table.rows.len());
        if failed == table.rows.len() {
            ExitCode::from(EXIT_FAILED)
        } else {
            ExitCode::from(EXIT_PARTIAL)
        }
    }
}
