//! `planar-spin`: simulate, verify and compare runs of the planar
//! spinning-particle equation.
//!
//! Exit codes:
//!
//! * 0: success
//! * 1: a check breached its tolerance (the report is still written)
//! * 2: bad configuration or arguments
//! * 3: integration or numerical failure
//! * 4: output could not be written

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "planar-spin", version, about = "Planar spinning particle: integrate, verify, compare")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Run configuration (JSON). Defaults to the built-in demo.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the third-order equation and write the trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run a seeded property suite and write its JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// equation, helmholtz, symmetry, lagrangian, hamiltonian, spin or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Overrides the seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Coefficient mutation for the helmholtz and symmetry suites.
        #[arg(long)]
        mutation: Option<String>,
    },
    /// Integrate the third-order and the canonical flow from matched data
    /// and report the worldline deviation.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Mass parameter of the canonical flow (defaults to the configured μ).
        #[arg(long)]
        canonical_mu: Option<f64>,
        /// Exit with 1 when the deviation is not below this value.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { common, format } => commands::simulate(&common, format),
        Command::Verify { common, suite, seed, mutation } => {
            commands::verify(&common, &suite, seed, mutation.as_deref())
        }
        Command::Compare { common, format, canonical_mu, tolerance } => {
            commands::compare(&common, format, canonical_mu, tolerance)
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
