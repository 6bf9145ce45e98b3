//! `sddm simulate` — Monte Carlo estimates of the price moments under a fixed
//! seed, as an independent check on the closed forms.

use crate::cmd::{parse_horizon, resolve_model, HorizonArg, MethodArg};
use crate::error::CliError;
use crate::io;
use crate::manifest::RunManifest;
use sddm::oracle::{auto_horizon, mc_price_moments, simulate_joint_paths, McPriceMoments, SimConfig};
use serde::Serialize;
use std::path::PathBuf;

/// Relative tail mass at which the automatic horizon truncates the price
/// series.
const AUTO_HORIZON_EPSILON: f64 = 1e-9;

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Model file (or estimation report with embedded models)
    #[arg(value_name = "MODEL")]
    model: PathBuf,

    /// Which embedded model to take from a report input
    #[arg(long, value_enum)]
    method: Option<MethodArg>,

    /// Number of simulated dividend paths
    #[arg(long, default_value_t = 100_000)]
    paths: usize,

    /// Seed of the deterministic path generator
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Truncation horizon in years: `auto` or a fixed count
    #[arg(long, default_value = "auto", value_parser = parse_horizon)]
    horizon: HorizonArg,

    /// Pair each path with its antithetic twin
    #[arg(long)]
    antithetic: bool,

    /// Also write every path's truncated price pair to this CSV
    #[arg(long, value_name = "CSV")]
    paths_out: Option<PathBuf>,

    /// Write the estimates here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SimulateOutput {
    /// Horizon actually simulated (resolved when `auto`).
    horizon: u32,
    seed: u64,
    antithetic: bool,
    #[serde(flatten)]
    moments: McPriceMoments<f64>,
}

pub fn run(args: SimulateArgs) -> Result<(), CliError> {
    let model = resolve_model(&args.model, args.method)?;
    let horizon = match args.horizon {
        HorizonArg::Fixed(h) => h,
        HorizonArg::Auto => auto_horizon(&model, AUTO_HORIZON_EPSILON)?,
    };
    let config = SimConfig {
        horizon,
        n_paths: args.paths,
        seed: args.seed,
        antithetic: args.antithetic,
    };

    let mut manifest = RunManifest::new("simulate");
    manifest.add_input(&args.model)?;
    if let Some(m) = args.method {
        manifest.set("method", m.to_method());
    }
    manifest.set("paths", config.n_paths);
    manifest.set("horizon", config.horizon);
    manifest.set("antithetic", config.antithetic);
    manifest.seed = Some(config.seed);
    manifest.emit(args.out.as_deref())?;

    if let Some(csv_path) = &args.paths_out {
        let paths = simulate_joint_paths(&model, &config)?;
        let mut writer = csv::Writer::from_path(csv_path)
            .map_err(|e| CliError::input(csv_path.display(), e))?;
        writer
            .write_record(["path_id", "price_a", "price_b"])
            .map_err(|e| CliError::input(csv_path.display(), e))?;
        for (id, (pa, pb)) in paths.iter().enumerate() {
            writer
                .write_record([id.to_string(), pa.to_string(), pb.to_string()])
                .map_err(|e| CliError::input(csv_path.display(), e))?;
        }
        writer
            .flush()
            .map_err(|e| CliError::input(csv_path.display(), e))?;
    }

    let moments = mc_price_moments(&model, &config)?;
    let output = SimulateOutput {
        horizon,
        seed: config.seed,
        antithetic: config.antithetic,
        moments,
    };
    io::write_output(args.out.as_deref(), &io::to_json_pretty(&output))
}
