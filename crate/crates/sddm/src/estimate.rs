//! Turning raw dividend and weekly price histories into model inputs:
//! per-stock growth statistics, two-point discretized growth laws, joint
//! probability tables, and CAPM discount rates.
//!
//! This layer is deliberately concrete in `f64`: it handles data, not model
//! algebra, and its contracts are about exact classification of observed
//! rates (threshold ties, dropped years, integer counts divided once).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{BucketSide, EstimateError, ModelError};
use crate::model::{GrowthDistribution, JointGrowthModel};

/// Weeks per year used for weekly/annual conversions of rates.
pub const WEEKS_PER_YEAR: f64 = 52.0;

/// A dividend history: strictly increasing years with positive payouts.
#[derive(Debug, Clone, PartialEq)]
pub struct DividendSeries {
    ticker: String,
    observations: Vec<(i32, f64)>,
}

impl DividendSeries {
    /// Validates and builds a series: at least two observations, strictly
    /// increasing years, strictly positive finite dividends.
    pub fn new(ticker: impl Into<String>, observations: Vec<(i32, f64)>) -> Result<Self, EstimateError> {
        let ticker = ticker.into();
        if observations.len() < 2 {
            return Err(EstimateError::TooShort {
                ticker,
                n: observations.len(),
            });
        }
        for (index, &(year, dividend)) in observations.iter().enumerate() {
            if index > 0 && year <= observations[index - 1].0 {
                return Err(EstimateError::NonIncreasingYears {
                    ticker,
                    index,
                    year,
                });
            }
            if !dividend.is_finite() || dividend <= 0.0 {
                return Err(EstimateError::NonPositiveDividend {
                    ticker,
                    year,
                    value: dividend,
                });
            }
        }
        Ok(Self {
            ticker,
            observations,
        })
    }

    #[inline]
    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    #[inline]
    pub fn observations(&self) -> &[(i32, f64)] {
        &self.observations
    }

    /// Yearly growth rates `g_t = d_t/d_{t−1} − 1`, each tagged with the year
    /// of the numerator dividend. Positivity of dividends guarantees every
    /// rate is above −1.
    pub fn growth_rates(&self) -> GrowthSample {
        let mut rates = Vec::with_capacity(self.observations.len() - 1);
        let mut years = Vec::with_capacity(self.observations.len() - 1);
        for pair in self.observations.windows(2) {
            let (_, prev) = pair[0];
            let (year, current) = pair[1];
            rates.push(current / prev - 1.0);
            years.push(year);
        }
        GrowthSample { rates, years }
    }
}

/// A sample of yearly growth rates with their years.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSample {
    rates: Vec<f64>,
    years: Vec<i32>,
}

impl GrowthSample {
    /// Builds a sample directly from `(year, rate)` pairs (rates must be
    /// finite and above −1, years strictly increasing).
    pub fn new(pairs: Vec<(i32, f64)>) -> Result<Self, EstimateError> {
        let mut rates = Vec::with_capacity(pairs.len());
        let mut years = Vec::with_capacity(pairs.len());
        for (index, &(year, rate)) in pairs.iter().enumerate() {
            if index > 0 && year <= pairs[index - 1].0 {
                return Err(EstimateError::NonIncreasingYears {
                    ticker: String::new(),
                    index,
                    year,
                });
            }
            if !rate.is_finite() || rate <= -1.0 {
                return Err(EstimateError::NonPositiveDividend {
                    ticker: String::new(),
                    year,
                    value: rate,
                });
            }
            rates.push(rate);
            years.push(year);
        }
        Ok(Self { rates, years })
    }

    #[inline]
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    #[inline]
    pub fn years(&self) -> &[i32] {
        &self.years
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

/// Median with the midpoint rule for even-length samples.
fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite rates compare"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Geometric mean growth rate `(Π(1+g))^{1/count} − 1`.
fn geometric_mean(rates: &[f64]) -> f64 {
    debug_assert!(!rates.is_empty());
    let product: f64 = rates.iter().map(|&g| 1.0 + g).product();
    product.powf(1.0 / rates.len() as f64) - 1.0
}

/// Order statistics and dispersion of a growth sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub min: f64,
    pub max: f64,
    pub geometric_mean: f64,
    pub median: f64,
    /// Sample variance with denominator `T − 1`.
    pub sample_variance: f64,
}

/// Computes the summary statistics of a sample; at least two rates are needed
/// for the sample variance to exist.
pub fn summary_stats(gs: &GrowthSample) -> Result<SummaryStats, EstimateError> {
    if gs.len() < 2 {
        return Err(EstimateError::UndefinedVariance);
    }
    let rates = gs.rates();
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let sample_variance = rates.iter().map(|&g| (g - mean) * (g - mean)).sum::<f64>()
        / (rates.len() as f64 - 1.0);
    Ok(SummaryStats {
        min: rates.iter().cloned().fold(f64::INFINITY, f64::min),
        max: rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        geometric_mean: geometric_mean(rates),
        median: median(rates),
        sample_variance,
    })
}

/// How a growth sample is collapsed onto two states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Threshold at the sample geometric mean; rates equal to the threshold
    /// go to the upper bucket; bucket values are bucket geometric means.
    GeometricMean,
    /// Threshold at the sample median; rates equal to the threshold are
    /// excluded; bucket values are bucket medians.
    Median,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::GeometricMean => write!(f, "geometric_mean"),
            Method::Median => write!(f, "median"),
        }
    }
}

/// A two-point growth law estimated from data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedLaw {
    pub method: Method,
    /// The fitted two-state distribution (low state first).
    pub distribution: GrowthDistribution<f64>,
    /// The bucketing threshold (sample geometric mean or median).
    pub threshold: f64,
    /// Years whose rate equalled the threshold and was excluded
    /// (median method only; empty for the geometric-mean method).
    pub excluded_years: Vec<i32>,
    /// Rates landing in the low and high buckets.
    pub counts: [usize; 2],
}

/// Classification of one sample against a per-stock threshold.
struct Buckets {
    threshold: f64,
    /// Bucket index (0 low, 1 high) per rate; `None` when excluded.
    assignment: Vec<Option<usize>>,
}

fn classify(rates: &[f64], method: Method) -> Buckets {
    match method {
        Method::GeometricMean => {
            let threshold = geometric_mean(rates);
            Buckets {
                threshold,
                assignment: rates
                    .iter()
                    .map(|&g| Some(usize::from(g >= threshold)))
                    .collect(),
            }
        }
        Method::Median => {
            let threshold = median(rates);
            Buckets {
                threshold,
                assignment: rates
                    .iter()
                    .map(|&g| {
                        if g == threshold {
                            None
                        } else {
                            Some(usize::from(g > threshold))
                        }
                    })
                    .collect(),
            }
        }
    }
}

/// Bucket value: geometric mean or median of the rates in one bucket.
fn bucket_value(rates: &[f64], method: Method) -> f64 {
    match method {
        Method::GeometricMean => geometric_mean(rates),
        Method::Median => median(rates),
    }
}

/// Collapses a growth sample onto a two-state law.
///
/// Thresholding and bucket values follow [`Method`]; probabilities are the
/// bucket counts over the retained total (excluded threshold ties shrink the
/// denominator). Fails with [`EstimateError::EmptyBucket`] when every
/// retained rate falls on one side.
pub fn discretize(gs: &GrowthSample, method: Method) -> Result<DiscretizedLaw, EstimateError> {
    if gs.len() < 2 {
        return Err(EstimateError::UndefinedVariance);
    }
    let buckets = classify(gs.rates(), method);
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut excluded_years = Vec::new();
    for ((&rate, &year), assignment) in gs
        .rates()
        .iter()
        .zip(gs.years())
        .zip(&buckets.assignment)
    {
        match assignment {
            Some(0) => low.push(rate),
            Some(_) => high.push(rate),
            None => excluded_years.push(year),
        }
    }
    if low.is_empty() {
        return Err(EstimateError::EmptyBucket {
            side: BucketSide::Below,
            threshold: buckets.threshold,
        });
    }
    if high.is_empty() {
        return Err(EstimateError::EmptyBucket {
            side: BucketSide::AtOrAbove,
            threshold: buckets.threshold,
        });
    }
    let retained = low.len() + high.len();
    let distribution = GrowthDistribution::new(
        vec![bucket_value(&low, method), bucket_value(&high, method)],
        vec![
            low.len() as f64 / retained as f64,
            high.len() as f64 / retained as f64,
        ],
    )
    .expect("bucket values straddle the threshold and counts are positive");
    Ok(DiscretizedLaw {
        method,
        distribution,
        threshold: buckets.threshold,
        excluded_years,
        counts: [low.len(), high.len()],
    })
}

/// A joint two-by-two growth law estimated from two aligned samples.
///
/// Rows index stock A's buckets, columns stock B's. Probabilities are integer
/// cell counts divided once by the retained year total, so the marginals
/// reproduce the per-stock classification exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDiscretization {
    pub method: Method,
    /// Bucket values per stock (low state first).
    pub states_a: [f64; 2],
    pub states_b: [f64; 2],
    /// Joint probabilities, cells summing to 1.
    pub probs: [[f64; 2]; 2],
    /// Joint year counts behind `probs`.
    pub counts: [[usize; 2]; 2],
    /// Marginal probabilities (row and column sums as exact count ratios).
    pub prob_a: [f64; 2],
    pub prob_b: [f64; 2],
    /// Per-stock bucketing thresholds on the aligned sample.
    pub threshold_a: f64,
    pub threshold_b: f64,
    /// Overlapping years retained in the table.
    pub years_used: usize,
    /// Overlapping years dropped because either stock's rate equalled its own
    /// threshold (median method only).
    pub dropped_years: Vec<i32>,
    /// Covariance of the fitted joint law,
    /// `Σ π_il (g_i − ḡ_A)(g_l − ḡ_B)`.
    pub growth_covariance: f64,
}

impl JointDiscretization {
    /// Builds the full pricing model from this law plus current dividends and
    /// discount rates.
    pub fn to_model(
        &self,
        dividend_a: f64,
        discount_a: f64,
        dividend_b: f64,
        discount_b: f64,
    ) -> Result<JointGrowthModel<f64>, ModelError> {
        JointGrowthModel::from_joint_table(
            dividend_a,
            discount_a,
            self.states_a.to_vec(),
            dividend_b,
            discount_b,
            self.states_b.to_vec(),
            self.probs.iter().map(|row| row.to_vec()).collect(),
        )
    }
}

/// Estimates the joint two-by-two law of two growth samples.
///
/// Samples are aligned on their common years (at least two required). Each
/// stock is classified against its own threshold computed on the aligned
/// sample; under the median method, years where either stock ties its own
/// threshold are dropped from the table entirely. Bucket values are computed
/// from the retained years, so the marginals of the table and the per-stock
/// values describe the same data.
pub fn joint_table(
    a: &GrowthSample,
    b: &GrowthSample,
    method: Method,
) -> Result<JointDiscretization, EstimateError> {
    // Intersection by year, preserving year order.
    let mut aligned: Vec<(i32, f64, f64)> = Vec::new();
    let mut ib = 0usize;
    for (&year, &ra) in a.years().iter().zip(a.rates()) {
        while ib < b.len() && b.years()[ib] < year {
            ib += 1;
        }
        if ib < b.len() && b.years()[ib] == year {
            aligned.push((year, ra, b.rates()[ib]));
        }
    }
    if aligned.len() < 2 {
        return Err(EstimateError::NoOverlap { n: aligned.len() });
    }

    let rates_a: Vec<f64> = aligned.iter().map(|&(_, ra, _)| ra).collect();
    let rates_b: Vec<f64> = aligned.iter().map(|&(_, _, rb)| rb).collect();
    let buckets_a = classify(&rates_a, method);
    let buckets_b = classify(&rates_b, method);

    let mut counts = [[0usize; 2]; 2];
    let mut dropped_years = Vec::new();
    let mut kept_a: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut kept_b: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (idx, &(year, ra, rb)) in aligned.iter().enumerate() {
        match (buckets_a.assignment[idx], buckets_b.assignment[idx]) {
            (Some(i), Some(l)) => {
                counts[i][l] += 1;
                kept_a[i].push(ra);
                kept_b[l].push(rb);
            }
            _ => dropped_years.push(year),
        }
    }

    let empty = |bucket: &Vec<f64>, side, threshold| {
        if bucket.is_empty() {
            Err(EstimateError::EmptyBucket { side, threshold })
        } else {
            Ok(())
        }
    };
    empty(&kept_a[0], BucketSide::Below, buckets_a.threshold)?;
    empty(&kept_a[1], BucketSide::AtOrAbove, buckets_a.threshold)?;
    empty(&kept_b[0], BucketSide::Below, buckets_b.threshold)?;
    empty(&kept_b[1], BucketSide::AtOrAbove, buckets_b.threshold)?;

    let total = counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
    let to_prob = |c: usize| c as f64 / total as f64;
    let probs = [
        [to_prob(counts[0][0]), to_prob(counts[0][1])],
        [to_prob(counts[1][0]), to_prob(counts[1][1])],
    ];
    let prob_a = [
        to_prob(counts[0][0] + counts[0][1]),
        to_prob(counts[1][0] + counts[1][1]),
    ];
    let prob_b = [
        to_prob(counts[0][0] + counts[1][0]),
        to_prob(counts[0][1] + counts[1][1]),
    ];
    let states_a = [
        bucket_value(&kept_a[0], method),
        bucket_value(&kept_a[1], method),
    ];
    let states_b = [
        bucket_value(&kept_b[0], method),
        bucket_value(&kept_b[1], method),
    ];

    let mean_a = prob_a[0] * states_a[0] + prob_a[1] * states_a[1];
    let mean_b = prob_b[0] * states_b[0] + prob_b[1] * states_b[1];
    let mut growth_covariance = 0.0;
    for i in 0..2 {
        for l in 0..2 {
            growth_covariance += probs[i][l] * (states_a[i] - mean_a) * (states_b[l] - mean_b);
        }
    }

    Ok(JointDiscretization {
        method,
        states_a,
        states_b,
        probs,
        counts,
        prob_a,
        prob_b,
        threshold_a: buckets_a.threshold,
        threshold_b: buckets_b.threshold,
        years_used: total,
        dropped_years,
        growth_covariance,
    })
}

/// Simple returns `p_t/p_{t−1} − 1` of a positive price series.
pub fn simple_returns(prices: &[f64]) -> Result<Vec<f64>, EstimateError> {
    check_prices(prices)?;
    Ok(prices.windows(2).map(|w| w[1] / w[0] - 1.0).collect())
}

/// Log returns `ln(p_t/p_{t−1})` of a positive price series.
pub fn log_returns(prices: &[f64]) -> Result<Vec<f64>, EstimateError> {
    check_prices(prices)?;
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

fn check_prices(prices: &[f64]) -> Result<(), EstimateError> {
    for (index, &p) in prices.iter().enumerate() {
        if !p.is_finite() || p <= 0.0 {
            return Err(EstimateError::NonPositivePrice { index, value: p });
        }
    }
    if prices.len() < 2 {
        return Err(EstimateError::TooFewObservations { n: prices.len() });
    }
    Ok(())
}

/// Annualized mean log return of a weekly price series:
/// `52 · mean(ln(p_t/p_{t−1}))`.
pub fn annualized_log_return(weekly_prices: &[f64]) -> Result<f64, EstimateError> {
    let logs = log_returns(weekly_prices)?;
    Ok(WEEKS_PER_YEAR * logs.iter().sum::<f64>() / logs.len() as f64)
}

/// Ordinary least squares of `y` on `x` with an intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    /// Intercept estimate.
    pub alpha: f64,
    /// Slope estimate.
    pub beta: f64,
    /// t statistics of intercept and slope against zero.
    pub t_alpha: f64,
    pub t_beta: f64,
    /// Two-sided p-values from the Student-t distribution with `n − 2`
    /// degrees of freedom.
    pub p_alpha: f64,
    pub p_beta: f64,
    /// Coefficient of determination, in `[0, 1]`.
    pub r_squared: f64,
    pub n_obs: usize,
}

/// Fits `y = alpha + beta·x + e` by ordinary least squares.
///
/// Needs at least three observations (one residual degree of freedom) and a
/// non-constant regressor.
pub fn ols(y: &[f64], x: &[f64]) -> Result<RegressionResult, EstimateError> {
    let n = y.len().min(x.len());
    if n < 3 {
        return Err(EstimateError::TooFewObservations { n });
    }
    let (y, x) = (&y[..n], &x[..n]);
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&v| (v - mean_x) * (v - mean_x)).sum();
    if sxx <= 0.0 {
        return Err(EstimateError::DegenerateRegressor);
    }
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(&xv, &yv)| (xv - mean_x) * (yv - mean_y))
        .sum();
    let beta = sxy / sxx;
    let alpha = mean_y - beta * mean_x;

    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(&xv, &yv)| {
            let e = yv - alpha - beta * xv;
            e * e
        })
        .sum();
    let sst: f64 = y.iter().map(|&v| (v - mean_y) * (v - mean_y)).sum();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else if ssr <= f64::EPSILON * nf {
        1.0
    } else {
        0.0
    };

    let sigma2 = ssr / (nf - 2.0);
    let se_beta = (sigma2 / sxx).sqrt();
    let se_alpha = (sigma2 * (1.0 / nf + mean_x * mean_x / sxx)).sqrt();
    let t_of = |estimate: f64, se: f64| {
        if se > 0.0 {
            estimate / se
        } else if estimate == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(estimate)
        }
    };
    let t_alpha = t_of(alpha, se_alpha);
    let t_beta = t_of(beta, se_beta);
    let student = StudentsT::new(0.0, 1.0, nf - 2.0).expect("valid Student-t parameters");
    let p_of = |t: f64| {
        if t.is_finite() {
            2.0 * (1.0 - student.cdf(t.abs()))
        } else {
            0.0
        }
    };
    Ok(RegressionResult {
        alpha,
        beta,
        t_alpha,
        t_beta,
        p_alpha: p_of(t_alpha),
        p_beta: p_of(t_beta),
        r_squared,
        n_obs: n,
    })
}

/// CAPM discount rate `k = r_f + β (r_M − r_f)`.
#[inline]
pub fn capm_rate(risk_free: f64, beta: f64, market_return: f64) -> f64 {
    risk_free + beta * (market_return - risk_free)
}

/// One stock's slice of an estimation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockReport {
    pub ticker: String,
    pub stats: SummaryStats,
    pub geometric_mean_law: DiscretizedLaw,
    pub median_law: DiscretizedLaw,
    /// CAPM block, present when a price history was supplied.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub capm: Option<CapmEstimate>,
}

/// CAPM inputs and the implied discount rate for one stock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapmEstimate {
    pub regression: RegressionResult,
    pub risk_free_rate: f64,
    pub market_return: f64,
    /// `k = r_f + β (r_M − r_f)`, all at annual scale.
    pub discount_rate: f64,
}

/// Everything estimated from the input histories: per-stock statistics and
/// two-point laws under both methods, plus joint tables when two stocks are
/// given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub stock_a: StockReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stock_b: Option<StockReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub joint_geometric_mean: Option<JointDiscretization>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub joint_median: Option<JointDiscretization>,
}

/// Builds the per-stock half of a report (statistics plus both two-point
/// laws).
pub fn stock_report(series: &DividendSeries) -> Result<StockReport, EstimateError> {
    let gs = series.growth_rates();
    Ok(StockReport {
        ticker: series.ticker().to_string(),
        stats: summary_stats(&gs)?,
        geometric_mean_law: discretize(&gs, Method::GeometricMean)?,
        median_law: discretize(&gs, Method::Median)?,
        capm: None,
    })
}
