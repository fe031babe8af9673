//! `fockswap`: run the swapping and transfer protocols, the two-photon
//! bunching experiment, parameter sweeps and the self-check suite.
//!
//! Exit status: 0 on success, 1 when `verify` finds a failing check, 2 for
//! malformed configuration or I/O problems.

mod commands;
mod config;

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Output;
use config::{CommonFlags, ConfigError, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "fockswap", version, about = "Few-photon linear-optics simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Heralded entanglement swapping: per-pattern states, probabilities, concurrences.
    Swap(CommonFlags),
    /// Polarization state transfer: the eight detector/path branches.
    Transfer(CommonFlags),
    /// Two photons on a balanced beam splitter.
    Hom(CommonFlags),
    /// Oracle-equivalence and protocol self-checks; exits 1 on any failure.
    Verify(CommonFlags),
    /// Repeat swap or transfer over a grid or seeded random samples.
    Sweep(CommonFlags),
}

impl Command {
    fn split(&self) -> (&'static str, &CommonFlags) {
        match self {
            Command::Swap(f) => ("swap", f),
            Command::Transfer(f) => ("transfer", f),
            Command::Hom(f) => ("hom", f),
            Command::Verify(f) => ("verify", f),
            Command::Sweep(f) => ("sweep", f),
        }
    }
}

fn write_output(out: &Output, cfg: &RunConfig) -> io::Result<()> {
    let sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = io::BufWriter::new(sink);
    match cfg.format {
        Format::Json => {
            writeln!(sink, "{}", out.json)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(&out.table.header)?;
            for row in &out.table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
    }
    sink.flush()
}

fn run(cli: Cli) -> Result<bool, ConfigError> {
    let (name, flags) = cli.command.split();
    let cfg = RunConfig::resolve(name, flags)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let result = match name {
        "swap" => commands::swap(&cfg),
        "transfer" => commands::transfer(&cfg),
        "hom" => commands::hom(&cfg),
        "verify" => commands::verify(&cfg),
        _ => commands::sweep(&cfg),
    };
    let out = result.map_err(|e| ConfigError(e.to_string()))?;
    if name == "verify" {
        for row in &out.table.rows {
            let status = if row[1] == "true" { "PASS" } else { "FAIL" };
            eprintln!("{status} {}: {}", row[0], row[2]);
        }
    }
    write_output(&out, &cfg).map_err(|e| ConfigError(format!("writing output: {e}")))?;
    Ok(out.success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
