//! `fibersr`: closed-form and numerical cooperative emission of atom strings on a nanofiber.
//!
//! Units: rates in γ0, times in τ0 = 1/γ0, intensities in I0 = ħω0γ0, energies in ħω0.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{resolve, AnalyticParams, EvolveParams, FigureParams, LengthParams, SweepParams};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "fibersr", version, about = "Cooperative spontaneous emission of atoms along a nanofiber")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form symmetric-state or mean-field results
    Analytic {
        /// Flat TOML or JSON file with the same keys as the long flags
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        params: AnalyticParams,
    },
    /// Integrate the master equation and write a trajectory
    Evolve {
        /// Flat TOML or JSON file with the same keys as the long flags
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        params: EvolveParams,
    },
    /// Guided fraction as a function of the atom number
    Sweep {
        /// Flat TOML or JSON file with the same keys as the long flags
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        params: SweepParams,
    },
    /// Cooperativity length c/Γ in meters
    Length {
        /// Flat TOML or JSON file with the same keys as the long flags
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        params: LengthParams,
    },
    /// Write the data behind one of the standard figures
    Figure {
        /// Flat TOML or JSON file with the same keys as the long flags
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        params: FigureParams,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analytic { config, params } => commands::analytic(resolve(&params, config.as_deref())?),
        Command::Evolve { config, params } => commands::evolve(resolve(&params, config.as_deref())?),
        Command::Sweep { config, params } => commands::sweep(resolve(&params, config.as_deref())?),
        Command::Length { config, params } => commands::length(resolve(&params, config.as_deref())?),
        Command::Figure { config, params } => commands::figure(resolve(&params, config.as_deref())?),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
