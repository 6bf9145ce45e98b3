//! Subcommand implementations and the option types they share.

pub mod estimate;
pub mod moments;
pub mod optimize;
pub mod simulate;
pub mod sweep;

use crate::error::CliError;
use crate::io::{self, JsonInput};
use sddm::model::JointGrowthModel;
use sddm::portfolio::{AlphaGrid, GridSpacing, ReturnMoments};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Which discretization method to use when one must be chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    /// Threshold and bucket values by geometric means
    #[serde(alias = "geometric_mean")]
    Geomean,
    /// Threshold and bucket values by medians
    Median,
}

impl MethodArg {
    /// Key used for the embedded model slots in report files.
    pub fn report_key(self) -> &'static str {
        match self {
            MethodArg::Geomean => "geometric_mean",
            MethodArg::Median => "median",
        }
    }

    pub fn to_method(self) -> sddm::estimate::Method {
        match self {
            MethodArg::Geomean => sddm::estimate::Method::GeometricMean,
            MethodArg::Median => sddm::estimate::Method::Median,
        }
    }
}

/// `--horizon auto|N`.
#[derive(Debug, Clone, Copy)]
pub enum HorizonArg {
    Auto,
    Fixed(u32),
}

pub fn parse_horizon(raw: &str) -> Result<HorizonArg, String> {
    if raw.eq_ignore_ascii_case("auto") {
        return Ok(HorizonArg::Auto);
    }
    raw.parse::<u32>()
        .map(HorizonArg::Fixed)
        .map_err(|_| format!("expected `auto` or a positive integer, got `{raw}`"))
}

/// `--alpha-grid lo:hi:n[:log|:lin]`.
pub fn parse_alpha_grid(raw: &str) -> Result<AlphaGrid<f64>, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() < 3 || parts.len() > 4 {
        return Err(format!(
            "expected `lo:hi:n` or `lo:hi:n:log|lin`, got `{raw}`"
        ));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| format!("bad grid lower bound `{}`", parts[0]))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad grid upper bound `{}`", parts[1]))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|_| format!("bad grid size `{}`", parts[2]))?;
    let spacing = match parts.get(3) {
        None => GridSpacing::Log,
        Some(&"log") => GridSpacing::Log,
        Some(&"lin") => GridSpacing::Linear,
        Some(other) => return Err(format!("bad grid spacing `{other}` (use log or lin)")),
    };
    Ok(AlphaGrid {
        lo,
        hi,
        points,
        spacing,
    })
}

/// Method used when extracting an embedded model from a report file: the
/// explicit flag wins, then the report's own `method` annotation, then the
/// geometric-mean default.
fn report_method(flag: Option<MethodArg>, report: &serde_json::Value) -> MethodArg {
    if let Some(m) = flag {
        return m;
    }
    match report.get("method").and_then(|v| v.as_str()) {
        Some("median") => MethodArg::Median,
        _ => MethodArg::Geomean,
    }
}

/// Loads a model from a model file or an estimation report.
pub fn resolve_model(
    path: &Path,
    method: Option<MethodArg>,
) -> Result<JointGrowthModel<f64>, CliError> {
    match io::classify_json(path, io::read_json(path)?)? {
        JsonInput::Model(m) => Ok(m),
        JsonInput::Report(report) => {
            let m = report_method(method, &report);
            io::model_from_report(path, &report, m.report_key())
        }
        JsonInput::Moments(_) => Err(CliError::Domain(format!(
            "{}: this command needs a model file, not return moments",
            path.display()
        ))),
    }
}

/// Loads return moments directly or derives them from a model/report input.
pub fn resolve_return_moments(
    path: &Path,
    method: Option<MethodArg>,
) -> Result<ReturnMoments<f64>, CliError> {
    let rm = match io::classify_json(path, io::read_json(path)?)? {
        JsonInput::Moments(rm) => rm,
        JsonInput::Model(m) => m.return_moments()?,
        JsonInput::Report(report) => {
            let m = report_method(method, &report);
            io::model_from_report(path, &report, m.report_key())?.return_moments()?
        }
    };
    Ok(rm)
}
