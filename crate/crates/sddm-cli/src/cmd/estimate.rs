//! `sddm estimate` — from dividend (and optionally price) histories to growth
//! laws, joint tables, CAPM discount rates, and ready-to-use model files.

use crate::cmd::MethodArg;
use crate::error::CliError;
use crate::io::{self, PriceSeries};
use crate::manifest::RunManifest;
use sddm::estimate::{
    annualized_log_return, capm_rate, joint_table, log_returns, ols, simple_returns,
    stock_report, CapmEstimate, DividendSeries, EstimationReport, JointDiscretization, Method,
    StockReport, WEEKS_PER_YEAR,
};
use sddm::model::JointGrowthModel;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, clap::Args)]
pub struct EstimateArgs {
    /// Dividend history CSV for stock A (`ticker,year,dividend`)
    #[arg(long, value_name = "CSV")]
    dividends_a: PathBuf,

    /// Dividend history CSV for stock B
    #[arg(long, value_name = "CSV")]
    dividends_b: Option<PathBuf>,

    /// Weekly price history CSV for stock A (`date,stock_close,index_close`);
    /// enables the CAPM discount-rate block
    #[arg(long, value_name = "CSV")]
    prices_a: Option<PathBuf>,

    /// Weekly price history CSV for stock B
    #[arg(long, value_name = "CSV", requires = "prices_a", requires = "dividends_b")]
    prices_b: Option<PathBuf>,

    /// JSON config: risk_free_rate, market_return, method, return_convention
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,

    /// Headline method tag for the report (overrides the config)
    #[arg(long, value_enum)]
    method: Option<MethodArg>,

    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// How weekly returns are formed for the CAPM regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ReturnConvention {
    Simple,
    Log,
}

impl Default for ReturnConvention {
    fn default() -> Self {
        ReturnConvention::Simple
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EstimateConfig {
    /// Annual risk-free rate; required whenever price files are supplied.
    risk_free_rate: Option<f64>,
    /// Annual market return; defaults to the annualized mean log return of
    /// stock A's index column.
    market_return: Option<f64>,
    method: Option<MethodArg>,
    return_convention: ReturnConvention,
}

/// The report plus the models it implies, so downstream commands can be fed
/// directly from this file.
#[derive(Debug, Serialize)]
struct EstimateOutput {
    /// Headline method tag; downstream commands reading this file use it when
    /// `--method` is not given.
    method: Method,
    #[serde(flatten)]
    report: EstimationReport,
    /// Model built from the geometric-mean joint table (present when both
    /// stocks have dividend and price data).
    #[serde(skip_serializing_if = "Option::is_none")]
    model_geometric_mean: Option<JointGrowthModel<f64>>,
    /// Model built from the median joint table.
    #[serde(skip_serializing_if = "Option::is_none")]
    model_median: Option<JointGrowthModel<f64>>,
}

fn load_config(path: Option<&Path>) -> Result<EstimateConfig, CliError> {
    match path {
        None => Ok(EstimateConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(path.display(), e))?;
            serde_json::from_str(&text).map_err(|e| CliError::input(path.display(), e))
        }
    }
}

/// Fits the CAPM regression of weekly excess stock returns on weekly excess
/// market returns and converts it into an annual discount rate.
fn capm_block(
    prices: &PriceSeries,
    convention: ReturnConvention,
    risk_free: f64,
    market_return: f64,
) -> Result<CapmEstimate, CliError> {
    let (stock_returns, market_returns) = match convention {
        ReturnConvention::Simple => (
            simple_returns(&prices.stock)?,
            simple_returns(&prices.index)?,
        ),
        ReturnConvention::Log => (log_returns(&prices.stock)?, log_returns(&prices.index)?),
    };
    let weekly_rf = risk_free / WEEKS_PER_YEAR;
    let excess_stock: Vec<f64> = stock_returns.iter().map(|r| r - weekly_rf).collect();
    let excess_market: Vec<f64> = market_returns.iter().map(|r| r - weekly_rf).collect();
    let regression = ols(&excess_stock, &excess_market)?;
    let discount_rate = capm_rate(risk_free, regression.beta, market_return);
    Ok(CapmEstimate {
        regression,
        risk_free_rate: risk_free,
        market_return,
        discount_rate,
    })
}

/// Emits a stderr warning when the two files disagree about the index level
/// on overlapping rows (they are supposed to carry the same market index).
fn warn_on_index_divergence(pa: &Path, a: &PriceSeries, pb: &Path, b: &PriceSeries) {
    let n = a.index.len().min(b.index.len());
    for i in 0..n {
        let (x, y) = (a.index[i], b.index[i]);
        if (x - y).abs() > 1e-9 * x.abs().max(y.abs()).max(1.0) {
            eprintln!(
                "warning: index columns of {} and {} diverge (first at data row {}); \
                 using {} for the market return",
                pa.display(),
                pb.display(),
                i + 1,
                pa.display()
            );
            return;
        }
    }
    if a.index.len() != b.index.len() {
        eprintln!(
            "warning: index columns of {} and {} have different lengths ({} vs {}); \
             using {} for the market return",
            pa.display(),
            pb.display(),
            a.index.len(),
            b.index.len(),
            pa.display()
        );
    }
}

/// Builds the surrogate model implied by one joint table: growth means are the
/// per-stock geometric means, growth variances the sample variances, and the
/// growth covariance comes from the table. Failures (for instance a CAPM rate
/// at or below the mean growth) downgrade to a warning and an omitted model.
fn implied_model(
    joint: &JointDiscretization,
    a: &StockReport,
    b: &StockReport,
    dividend_a: f64,
    dividend_b: f64,
) -> Option<JointGrowthModel<f64>> {
    let (capm_a, capm_b) = (a.capm.as_ref()?, b.capm.as_ref()?);
    match JointGrowthModel::from_moments(
        dividend_a,
        capm_a.discount_rate,
        a.stats.geometric_mean,
        a.stats.sample_variance,
        dividend_b,
        capm_b.discount_rate,
        b.stats.geometric_mean,
        b.stats.sample_variance,
        joint.growth_covariance,
    ) {
        Ok(model) => Some(model),
        Err(e) => {
            eprintln!("warning: cannot build the {} model: {e}", joint.method);
            None
        }
    }
}

pub fn run(args: EstimateArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("estimate");
    for path in [
        Some(&args.dividends_a),
        args.dividends_b.as_ref(),
        args.prices_a.as_ref(),
        args.prices_b.as_ref(),
        args.config.as_ref(),
    ]
    .into_iter()
    .flatten()
    {
        manifest.add_input(path)?;
    }

    let config = load_config(args.config.as_deref())?;
    let method = args.method.or(config.method).unwrap_or(MethodArg::Geomean);

    let series_a = io::read_dividends(&args.dividends_a)?;
    let series_b = args
        .dividends_b
        .as_deref()
        .map(io::read_dividends)
        .transpose()?;

    let prices_a = args.prices_a.as_deref().map(io::read_prices).transpose()?;
    let prices_b = args.prices_b.as_deref().map(io::read_prices).transpose()?;

    // Resolve the CAPM inputs when any price file is present.
    let mut market_return = config.market_return;
    let mut risk_free = None;
    if prices_a.is_some() || prices_b.is_some() {
        let rf = config.risk_free_rate.ok_or_else(|| {
            CliError::Domain(
                "risk_free_rate is required in the config when price files are supplied"
                    .to_string(),
            )
        })?;
        risk_free = Some(rf);
        if let (Some(pa), Some(pb)) = (&prices_a, &prices_b) {
            warn_on_index_divergence(
                args.prices_a.as_deref().unwrap(),
                pa,
                args.prices_b.as_deref().unwrap(),
                pb,
            );
        }
        if market_return.is_none() {
            let reference = prices_a
                .as_ref()
                .or(prices_b.as_ref())
                .expect("some price file is present");
            market_return = Some(annualized_log_return(&reference.index)?);
        }
    }

    let mut report_a = stock_report(&series_a)?;
    if let Some(pa) = &prices_a {
        report_a.capm = Some(capm_block(
            pa,
            config.return_convention,
            risk_free.expect("set with prices"),
            market_return.expect("set with prices"),
        )?);
    }

    let mut report_b = series_b.as_ref().map(stock_report).transpose()?;
    if let (Some(rb), Some(pb)) = (report_b.as_mut(), &prices_b) {
        rb.capm = Some(capm_block(
            pb,
            config.return_convention,
            risk_free.expect("set with prices"),
            market_return.expect("set with prices"),
        )?);
    }

    let (joint_geometric_mean, joint_median) = match &series_b {
        Some(sb) => {
            let ga = series_a.growth_rates();
            let gb = sb.growth_rates();
            (
                Some(joint_table(&ga, &gb, Method::GeometricMean)?),
                Some(joint_table(&ga, &gb, Method::Median)?),
            )
        }
        None => (None, None),
    };

    let current_dividend = |s: &DividendSeries| s.observations().last().expect("non-empty").1;
    let (model_geometric_mean, model_median) = match (&series_b, &report_b) {
        (Some(sb), Some(rb)) => {
            let (da, db) = (current_dividend(&series_a), current_dividend(sb));
            (
                joint_geometric_mean
                    .as_ref()
                    .and_then(|j| implied_model(j, &report_a, rb, da, db)),
                joint_median
                    .as_ref()
                    .and_then(|j| implied_model(j, &report_a, rb, da, db)),
            )
        }
        _ => (None, None),
    };

    let output = EstimateOutput {
        method: method.to_method(),
        report: EstimationReport {
            stock_a: report_a,
            stock_b: report_b,
            joint_geometric_mean,
            joint_median,
        },
        model_geometric_mean,
        model_median,
    };

    manifest.set("method", method.to_method());
    manifest.set("return_convention", config.return_convention);
    manifest.set("risk_free_rate", risk_free);
    manifest.set("market_return", market_return);
    manifest.emit(args.out.as_deref())?;
    io::write_output(args.out.as_deref(), &io::to_json_pretty(&output))
}
