//! `sddm` — stochastic dividend pricing toolkit.
//!
//! Subcommands: `estimate` (CSV histories → growth laws, joint tables, CAPM
//! rates, and model files), `moments` (closed-form price moments), `simulate`
//! (Monte Carlo check of the closed forms), `optimize` (quadratic-utility
//! portfolio), and `sweep` (optimal weights across a risk-aversion grid).
//!
//! Exit codes: 0 success, 2 input/parse errors, 3 violated preconditions,
//! 4 non-convergence of a requested moment or horizon.

mod cmd;
mod error;
mod io;
mod manifest;

use clap::{Parser, Subcommand};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "sddm",
    version,
    about = "Stochastic dividend pricing: estimation, closed-form moments, \
             Monte Carlo validation, and mean-variance portfolios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate growth laws, joint tables, and CAPM discount rates from CSVs
    Estimate(cmd::estimate::EstimateArgs),
    /// Closed-form price moments of a model file
    Moments(cmd::moments::MomentsArgs),
    /// Monte Carlo estimates of the price moments under a fixed seed
    Simulate(cmd::simulate::SimulateArgs),
    /// Optimal quadratic-utility portfolio for one or more risk aversions
    Optimize(cmd::optimize::OptimizeArgs),
    /// Optimal portfolios across a risk-aversion grid, as CSV
    Sweep(cmd::sweep::SweepArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(args) => cmd::estimate::run(args),
        Command::Moments(args) => cmd::moments::run(args),
        Command::Simulate(args) => cmd::simulate::run(args),
        Command::Optimize(args) => cmd::optimize::run(args),
        Command::Sweep(args) => cmd::sweep::run(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.code());
    }
}
