//! Error types for model construction, closed-form moments, the numeric
//! oracles, estimation, and portfolio optimization.
//!
//! All payloads are `f64` regardless of the scalar type used by the caller so
//! that messages are uniform and the enums stay object-safe-friendly.

use thiserror::Error;

/// Which of the two stocks in a joint model a value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stock {
    A,
    B,
}

impl Stock {
    /// The other stock of the pair.
    #[inline]
    pub fn other(self) -> Self {
        match self {
            Stock::A => Stock::B,
            Stock::B => Stock::A,
        }
    }
}

impl std::fmt::Display for Stock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stock::A => write!(f, "A"),
            Stock::B => write!(f, "B"),
        }
    }
}

/// Rejected inputs when constructing growth distributions, stock
/// specifications, or joint models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("states and probabilities must have the same nonzero length (got {states} states, {probs} probabilities)")]
    LengthMismatch { states: usize, probs: usize },
    #[error("growth state {index} = {value} must be finite, greater than -1, and strictly above its predecessor")]
    InvalidState { index: usize, value: f64 },
    #[error("probability {index} = {value} must be finite and strictly positive")]
    InvalidProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}; drift from 1 exceeds the renormalization tolerance {tolerance}")]
    ProbabilitySum { sum: f64, tolerance: f64 },
    #[error("current dividend must be positive and finite (got {value})")]
    InvalidDividend { value: f64 },
    #[error("discount rate must be finite and greater than -1 (got {value})")]
    InvalidDiscountRate { value: f64 },
    #[error("discount rate {discount_rate} must exceed mean growth {mean_growth} for the expected price to be finite")]
    DiscountNotAboveGrowth { discount_rate: f64, mean_growth: f64 },
    #[error("joint table is {rows}x{cols} but the marginals have {n_a} and {n_b} states")]
    JointShape { rows: usize, cols: usize, n_a: usize, n_b: usize },
    #[error("joint cell ({row},{col}) = {value} must be finite and non-negative")]
    InvalidJointCell { row: usize, col: usize, value: f64 },
    #[error("joint cells sum to {sum}; drift from 1 exceeds the renormalization tolerance {tolerance}")]
    JointSum { sum: f64, tolerance: f64 },
    #[error("joint table marginals deviate from the stated per-stock probabilities by {deviation} (limit {tolerance})")]
    MarginalMismatch { deviation: f64, tolerance: f64 },
    #[error("moment-matched two-point surrogate needs positive variances (got {var_a} and {var_b})")]
    NonPositiveVariance { var_a: f64, var_b: f64 },
    #[error("moment-matched two-point surrogate needs correlation in [-1, 1] (got {correlation})")]
    CorrelationOutOfRange { correlation: f64 },
}

/// Closed-form second moments exist only under the convergence conditions on
/// the growth law; these errors report the violated bound.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("price variance of stock {stock} does not exist: growth variance {growth_variance} is not below the bound {bound}")]
    VarianceNonConvergent {
        stock: Stock,
        growth_variance: f64,
        bound: f64,
    },
    #[error("price covariance does not exist: joint growth factor {joint_factor} is not inside (-{bound}, {bound})")]
    CovarianceNonConvergent { joint_factor: f64, bound: f64 },
}

/// Failures of the exact-enumeration and Monte Carlo oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("exact enumeration would visit {cells:.3e} state sequences, above the limit {limit:.3e}")]
    TooLarge { cells: f64, limit: f64 },
    #[error("price series does not converge: dominant geometric ratio {ratio} >= 1")]
    NonConvergent { ratio: f64 },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("automatic horizon exceeded {limit} steps at relative tolerance {epsilon:e}")]
    HorizonOverflow { limit: u32, epsilon: f64 },
    #[error("simulation needs at least 1 path (got {n_paths})")]
    NoPaths { n_paths: usize },
    #[error("batch-means standard errors need at least {required} paths (got {n_paths})")]
    TooFewPaths { n_paths: usize, required: usize },
}

/// Which side of a discretization threshold came up empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketSide {
    Below,
    AtOrAbove,
}

impl std::fmt::Display for BucketSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BucketSide::Below => write!(f, "below"),
            BucketSide::AtOrAbove => write!(f, "at or above"),
        }
    }
}

/// Failures when turning raw dividend or price histories into model inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("dividend series {ticker:?} needs at least 2 observations (got {n})")]
    TooShort { ticker: String, n: usize },
    #[error("dividend series {ticker:?} has non-increasing year {year} at position {index}")]
    NonIncreasingYears {
        ticker: String,
        index: usize,
        year: i32,
    },
    #[error("dividend series {ticker:?} year {year}: dividend {value} must be positive and finite")]
    NonPositiveDividend {
        ticker: String,
        year: i32,
        value: f64,
    },
    #[error("sample variance is undefined for a single growth rate")]
    UndefinedVariance,
    #[error("no growth rates {side} the threshold {threshold}; two-point discretization is impossible")]
    EmptyBucket { side: BucketSide, threshold: f64 },
    #[error("joint estimation needs at least 2 overlapping years (got {n})")]
    NoOverlap { n: usize },
    #[error("price series row {index}: price {value} must be positive and finite")]
    NonPositivePrice { index: usize, value: f64 },
    #[error("regression needs at least 3 observations (got {n})")]
    TooFewObservations { n: usize },
    #[error("regressor has zero variance; the slope is undefined")]
    DegenerateRegressor,
}

/// Failures of the two-asset quadratic-utility optimization layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PortfolioError {
    #[error("return moments must be finite with non-negative variances and |covariance| bounded by the variance product")]
    InvalidMoments,
    #[error("risk aversion must be positive and finite (got {alpha})")]
    InvalidAlpha { alpha: f64 },
    #[error("optimization is degenerate: denominator {denominator:e} is below {minimum:e}")]
    DegenerateProblem { denominator: f64, minimum: f64 },
    #[error("alpha grid needs finite bounds 0 < lo <= hi and at least {required} points (got {points})")]
    InvalidGrid { points: usize, required: usize },
    #[error("price basis needs finite inputs with positive dividends, discount rates above mean growth, and non-negative variances")]
    InvalidBasis,
}
