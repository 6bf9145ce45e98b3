//! `sddm sweep` — optimal portfolios across a risk-aversion grid, as CSV.

use crate::cmd::{parse_alpha_grid, resolve_return_moments, MethodArg};
use crate::error::CliError;
use crate::io;
use crate::manifest::RunManifest;
use sddm::portfolio::{alpha_sweep, AlphaGrid};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    /// Model file, return-moments file, or estimation report
    #[arg(value_name = "INPUT")]
    input: PathBuf,

    /// Which embedded model to take from a report input
    #[arg(long, value_enum)]
    method: Option<MethodArg>,

    /// Risk-aversion grid `lo:hi:n[:log|:lin]`
    #[arg(
        long,
        default_value = "0.1:1000:60",
        value_parser = parse_alpha_grid,
        value_name = "GRID"
    )]
    alpha_grid: AlphaGrid<f64>,

    /// Write the CSV here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn run(args: SweepArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("sweep");
    manifest.add_input(&args.input)?;
    if let Some(m) = args.method {
        manifest.set("method", m.to_method());
    }
    manifest.set("alpha_grid", &args.alpha_grid);
    manifest.emit(args.out.as_deref())?;

    let rm = resolve_return_moments(&args.input, args.method)?;
    let results = alpha_sweep(&rm, &args.alpha_grid)?;

    let mut csv = String::from("alpha,x_a,x_b,mean,variance,utility\n");
    for r in &results {
        let alpha = r.alpha.expect("sweep rows carry their alpha");
        let utility = r.expected_utility.expect("sweep rows carry utility");
        csv.push_str(&format!(
            "{alpha},{},{},{},{},{utility}\n",
            r.x_a, r.x_b, r.expected_return, r.variance
        ));
    }
    io::write_output(args.out.as_deref(), &csv)
}
