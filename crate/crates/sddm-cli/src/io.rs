//! File I/O: CSV readers with file-and-line error context, JSON input
//! classification, and output routing to stdout or `--out`.

use crate::error::CliError;
use sddm::estimate::DividendSeries;
use sddm::model::JointGrowthModel;
use sddm::portfolio::ReturnMoments;
use std::path::Path;

/// One weekly price history: ISO dates plus stock and index closes.
#[derive(Debug, Clone)]
pub struct PriceSeries {
    pub dates: Vec<String>,
    pub stock: Vec<f64>,
    pub index: Vec<f64>,
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn field<'a>(
    path: &Path,
    record: &'a csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<&'a str, CliError> {
    record.get(idx).ok_or_else(|| {
        CliError::Input(format!(
            "{}: line {}: missing column `{name}`",
            path.display(),
            record_line(record)
        ))
    })
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    let raw = field(path, record, idx, name)?;
    raw.trim().parse().map_err(|e| {
        CliError::Input(format!(
            "{}: line {}: column `{name}`: cannot parse `{raw}`: {e}",
            path.display(),
            record_line(record)
        ))
    })
}

fn open_csv(path: &Path, expected_headers: &[&str]) -> Result<csv::Reader<std::fs::File>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(path.display(), e))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::input(path.display(), e))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected_headers {
        return Err(CliError::Input(format!(
            "{}: line 1: expected header `{}`, found `{}`",
            path.display(),
            expected_headers.join(","),
            got.join(",")
        )));
    }
    Ok(reader)
}

/// Reads a dividend history CSV (`ticker,year,dividend`).
pub fn read_dividends(path: &Path) -> Result<DividendSeries, CliError> {
    let mut reader = open_csv(path, &["ticker", "year", "dividend"])?;
    let mut ticker: Option<String> = None;
    let mut observations: Vec<(i32, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::input(path.display(), e))?;
        let row_ticker = field(path, &record, 0, "ticker")?.to_string();
        match &ticker {
            None => ticker = Some(row_ticker),
            Some(t) if *t != row_ticker => {
                return Err(CliError::Input(format!(
                    "{}: line {}: ticker `{row_ticker}` differs from `{t}`; one series per file",
                    path.display(),
                    record_line(&record)
                )));
            }
            _ => {}
        }
        let year: i32 = parse_field(path, &record, 1, "year")?;
        let dividend: f64 = parse_field(path, &record, 2, "dividend")?;
        observations.push((year, dividend));
    }
    let ticker = ticker.ok_or_else(|| {
        CliError::Input(format!("{}: no data rows", path.display()))
    })?;
    DividendSeries::new(ticker, observations)
        .map_err(|e| CliError::domain(path.display(), e))
}

/// Reads a weekly price history CSV (`date,stock_close,index_close`).
pub fn read_prices(path: &Path) -> Result<PriceSeries, CliError> {
    let mut reader = open_csv(path, &["date", "stock_close", "index_close"])?;
    let mut series = PriceSeries {
        dates: Vec::new(),
        stock: Vec::new(),
        index: Vec::new(),
    };
    for record in reader.records() {
        let record = record.map_err(|e| CliError::input(path.display(), e))?;
        let date = field(path, &record, 0, "date")?;
        chrono::NaiveDate::parse_from_str(date, "%Y-%m-%d").map_err(|e| {
            CliError::Input(format!(
                "{}: line {}: column `date`: `{date}` is not an ISO date: {e}",
                path.display(),
                record_line(&record)
            ))
        })?;
        series.dates.push(date.to_string());
        series.stock.push(parse_field(path, &record, 1, "stock_close")?);
        series.index.push(parse_field(path, &record, 2, "index_close")?);
    }
    if series.stock.len() < 2 {
        return Err(CliError::Domain(format!(
            "{}: need at least two price rows, found {}",
            path.display(),
            series.stock.len()
        )));
    }
    Ok(series)
}

/// The kinds of JSON input accepted by moments/simulate/optimize/sweep.
pub enum JsonInput {
    Model(JointGrowthModel<f64>),
    Moments(ReturnMoments<f64>),
    /// An estimation report carrying embedded model files.
    Report(serde_json::Value),
}

/// Reads a JSON value; syntax errors are input errors (exit 2).
pub fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(path.display(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(path.display(), e))
}

/// Classifies a JSON input file by shape and validates it.
///
/// Structurally valid JSON that fails model/moments validation is a domain
/// error (exit 3). Closed-form price-moment reports are rejected here: their
/// five headline fields share names with return moments but live on the
/// price scale, so feeding one to the optimizer would be a silent unit error.
pub fn classify_json(path: &Path, value: serde_json::Value) -> Result<JsonInput, CliError> {
    let obj = value.as_object().ok_or_else(|| {
        CliError::Domain(format!("{}: expected a JSON object", path.display()))
    })?;
    if obj.contains_key("model_geometric_mean") || obj.contains_key("model_median") {
        return Ok(JsonInput::Report(value));
    }
    if let Some(stock_a) = obj.get("stock_a") {
        if stock_a.get("current_dividend").is_some() {
            let model: JointGrowthModel<f64> = serde_json::from_value(value)
                .map_err(|e| CliError::domain(path.display(), e))?;
            return Ok(JsonInput::Model(model));
        }
        // An estimation report that carries no embedded models; let the
        // extraction step explain what is missing.
        return Ok(JsonInput::Report(value));
    }
    if obj.contains_key("variance_exists_a") || obj.contains_key("covariance_exists") {
        return Err(CliError::Domain(format!(
            "{}: this is a price-moment report; pass the model file instead so \
             return moments can be derived",
            path.display()
        )));
    }
    if obj.contains_key("mean_a") {
        let moments: ReturnMoments<f64> = serde_json::from_value(value)
            .map_err(|e| CliError::domain(path.display(), e))?;
        return Ok(JsonInput::Moments(moments));
    }
    Err(CliError::Domain(format!(
        "{}: not a model, return-moments, or estimation-report file",
        path.display()
    )))
}

/// Extracts the embedded model of the requested method from a report file.
pub fn model_from_report(
    path: &Path,
    report: &serde_json::Value,
    method_key: &str,
) -> Result<JointGrowthModel<f64>, CliError> {
    let slot = format!("model_{method_key}");
    let value = report.get(&slot).cloned().ok_or_else(|| {
        CliError::Domain(format!(
            "{}: report has no `{slot}` (estimated without price data?)",
            path.display()
        ))
    })?;
    serde_json::from_value(value).map_err(|e| CliError::domain(path.display(), e))
}

/// Writes the primary artifact to stdout or to `--out`.
pub fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::input(path.display(), e)),
    }
}

/// Serializes a value as pretty JSON with a trailing newline.
pub fn to_json_pretty<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    text
}
