//! `sddm moments` — closed-form price means, variances, and covariance of a
//! model file, with existence flags.

use crate::cmd::{resolve_model, MethodArg};
use crate::error::CliError;
use crate::io;
use crate::manifest::RunManifest;
use sddm::Stock;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct MomentsArgs {
    /// Model file (or estimation report with embedded models)
    #[arg(value_name = "MODEL")]
    model: PathBuf,

    /// Which embedded model to take from a report input
    #[arg(long, value_enum)]
    method: Option<MethodArg>,

    /// Write the moments here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn run(args: MomentsArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("moments");
    manifest.add_input(&args.model)?;
    if let Some(m) = args.method {
        manifest.set("method", m.to_method());
    }
    manifest.emit(args.out.as_deref())?;

    let model = resolve_model(&args.model, args.method)?;
    let moments = model.price_moments();
    io::write_output(args.out.as_deref(), &io::to_json_pretty(&moments))?;

    // A missing second moment is still reported (as null), but the run exits
    // non-zero so pipelines notice the divergence.
    let mut failures = Vec::new();
    if !moments.variance_exists_a {
        if let Err(e) = model.price_variance(Stock::A) {
            failures.push(e.to_string());
        }
    }
    if !moments.variance_exists_b {
        if let Err(e) = model.price_variance(Stock::B) {
            failures.push(e.to_string());
        }
    }
    if !moments.covariance_exists {
        if let Err(e) = model.price_covariance() {
            failures.push(e.to_string());
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConvergent(failures.join("; ")))
    }
}
