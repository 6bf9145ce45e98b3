//! `sddm optimize` — the quadratic-utility optimal two-asset portfolio for
//! one or more risk-aversion values.

use crate::cmd::{resolve_return_moments, MethodArg};
use crate::error::CliError;
use crate::io;
use crate::manifest::RunManifest;
use sddm::portfolio::{optimal_weight, optimal_weight_boxed, portfolio_at, utility_domain_violated};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct OptimizeArgs {
    /// Model file, return-moments file, or estimation report
    #[arg(value_name = "INPUT")]
    input: PathBuf,

    /// Which embedded model to take from a report input
    #[arg(long, value_enum)]
    method: Option<MethodArg>,

    /// Risk-aversion value(s), comma-separated
    #[arg(long, value_delimiter = ',', required = true, value_name = "ALPHA")]
    alpha: Vec<f64>,

    /// Clamp the weight to [0, 1] (no short positions)
    #[arg(long)]
    boxed: bool,

    /// Write the result here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn run(args: OptimizeArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("optimize");
    manifest.add_input(&args.input)?;
    if let Some(m) = args.method {
        manifest.set("method", m.to_method());
    }
    manifest.set("alpha", &args.alpha);
    manifest.set("boxed", args.boxed);
    manifest.emit(args.out.as_deref())?;

    let rm = resolve_return_moments(&args.input, args.method)?;
    let mut results = Vec::with_capacity(args.alpha.len());
    for &alpha in &args.alpha {
        let x = if args.boxed {
            optimal_weight_boxed(&rm, alpha)?
        } else {
            optimal_weight(&rm, alpha)?
        };
        if utility_domain_violated(&rm, x, alpha) {
            eprintln!(
                "warning: at alpha = {alpha} the optimum sits beyond the bliss point of \
                 quadratic utility (mean + 3 sd exceeds 1/alpha); interpret with care"
            );
        }
        results.push(portfolio_at(&rm, x, Some(alpha)));
    }

    let rendered = if results.len() == 1 {
        io::to_json_pretty(&results[0])
    } else {
        io::to_json_pretty(&results)
    };
    io::write_output(args.out.as_deref(), &rendered)
}
