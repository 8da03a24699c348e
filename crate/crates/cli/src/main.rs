use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use saturee_core::harness::{self, ExperimentKind, ExperimentSpec, PowerGrid};
use saturee_core::sysmodel::SystemConfig;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    /// EE curves of every scheme over the power grid
    Sweep,
    /// Sum rate versus consumed power with tangent slopes
    Tradeoff,
    /// Saturation band report
    Saturation,
    /// Proposed scheme against the Dinkelbach baseline, with timing
    Compare,
    /// Single-link toy model
    Toy,
}

impl From<Experiment> for ExperimentKind {
    fn from(e: Experiment) -> Self {
        match e {
            Experiment::Sweep => ExperimentKind::Sweep,
            Experiment::Tradeoff => ExperimentKind::Tradeoff,
            Experiment::Saturation => ExperimentKind::Saturation,
            Experiment::Compare => ExperimentKind::Compare,
            Experiment::Toy => ExperimentKind::Toy,
        }
    }
}

/// Saturation-power energy-efficiency simulator for multi-user MISO downlink.
///
/// Writes a CSV table to --out (or stdout) and a short report to stderr.
#[derive(Debug, Parser)]
#[command(name = "saturee", version)]
struct Cli {
    experiment: Experiment,

    /// JSON system configuration
    #[arg(long)]
    config: PathBuf,

    /// First grid point (dBm over the band; dB in normalized mode)
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pmin_dbm: f64,

    #[arg(long, default_value_t = 46.0, allow_negative_numbers = true)]
    pmax_dbm: f64,

    #[arg(long, default_value_t = 2.0)]
    pstep_db: f64,

    #[arg(long, default_value_t = 100)]
    trials: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// CSV destination; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for Monte Carlo trials
    #[arg(long, default_value_t = 1)]
    workers: usize,

    /// Report rates in bits instead of nats
    #[arg(long)]
    bits: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("saturee: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = SystemConfig::from_json_file(&cli.config)?;
    let spec = ExperimentSpec {
        config,
        kind: cli.experiment.into(),
        grid: PowerGrid::new(cli.pmin_dbm, cli.pmax_dbm, cli.pstep_db)?,
        trials: cli.trials,
        seed: cli.seed,
        workers: cli.workers,
        bits: cli.bits,
        out: cli.out,
    };
    let output = harness::run(&spec)?;
    match &spec.out {
        Some(path) => harness::write_csv_file(&output.rows, path)?,
        None => {
            let stdout = io::stdout();
            harness::write_csv(&output.rows, stdout.lock()).context("writing CSV to stdout")?;
        }
    }
    let mut err = io::stderr().lock();
    err.write_all(output.summary.as_bytes())?;
    Ok(())
}
