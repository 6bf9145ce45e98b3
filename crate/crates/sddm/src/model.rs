//! Core domain types: discrete growth distributions, per-stock dividend
//! specifications, and the two-stock joint growth model.
//!
//! All types validate on construction (and therefore on deserialization, which
//! funnels through the same constructors), so every value in circulation
//! satisfies its invariants:
//!
//! * growth states are finite, strictly increasing, and greater than −1;
//! * probabilities are strictly positive and sum to 1 (tiny drifts below the
//!   renormalization tolerance are silently rescaled, larger ones rejected);
//! * joint cells are non-negative, sum to 1, and their row/column sums agree
//!   with the per-stock marginal probabilities;
//! * each discount rate exceeds the corresponding mean growth rate.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::scalar::Scalar;

/// Checks a probability vector's sum against the strict/renormalize policy.
///
/// Returns the factor to divide by (`None` when the sum is within the strict
/// tolerance and values are kept bit-for-bit), or an error when the drift
/// exceeds the renormalization tolerance.
fn normalization<T: Scalar>(sum: T, tolerance_context: &str) -> Result<Option<T>, ModelError> {
    let drift = (sum - T::one()).abs();
    if drift <= T::strict_tol() {
        Ok(None)
    } else if drift < T::renorm_tol() {
        Ok(Some(sum))
    } else {
        let err = match tolerance_context {
            "joint" => ModelError::JointSum {
                sum: sum.to64(),
                tolerance: T::renorm_tol().to64(),
            },
            _ => ModelError::ProbabilitySum {
                sum: sum.to64(),
                tolerance: T::renorm_tol().to64(),
            },
        };
        Err(err)
    }
}

/// A discrete distribution for a yearly growth rate: states `g_i > -1` in
/// strictly increasing order with strictly positive probabilities summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawGrowthDistribution<T>",
    into = "RawGrowthDistribution<T>",
    bound(
        serialize = "T: Serialize",
        deserialize = "T: Deserialize<'de>"
    )
)]
pub struct GrowthDistribution<T: Scalar = f64> {
    states: Vec<T>,
    probs: Vec<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrowthDistribution<T> {
    states: Vec<T>,
    probs: Vec<T>,
}

impl<T: Scalar> TryFrom<RawGrowthDistribution<T>> for GrowthDistribution<T> {
    type Error = ModelError;
    fn try_from(raw: RawGrowthDistribution<T>) -> Result<Self, ModelError> {
        GrowthDistribution::new(raw.states, raw.probs)
    }
}

impl<T: Scalar> From<GrowthDistribution<T>> for RawGrowthDistribution<T> {
    fn from(d: GrowthDistribution<T>) -> Self {
        RawGrowthDistribution {
            states: d.states,
            probs: d.probs,
        }
    }
}

impl<T: Scalar> GrowthDistribution<T> {
    /// Validates and builds a distribution; see the type docs for the rules.
    pub fn new(states: Vec<T>, probs: Vec<T>) -> Result<Self, ModelError> {
        if states.is_empty() || states.len() != probs.len() {
            return Err(ModelError::LengthMismatch {
                states: states.len(),
                probs: probs.len(),
            });
        }
        let minus_one = -T::one();
        for (i, &s) in states.iter().enumerate() {
            let increasing = i == 0 || s > states[i - 1];
            if !s.is_finite() || s <= minus_one || !increasing {
                return Err(ModelError::InvalidState {
                    index: i,
                    value: s.to64(),
                });
            }
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p <= T::zero() {
                return Err(ModelError::InvalidProbability {
                    index: i,
                    value: p.to64(),
                });
            }
        }
        let sum = probs.iter().fold(T::zero(), |a, &p| a + p);
        let mut probs = probs;
        if let Some(divisor) = normalization(sum, "marginal")? {
            for p in &mut probs {
                *p = *p / divisor;
            }
        }
        Ok(Self { states, probs })
    }

    /// Growth states in strictly increasing order.
    #[inline]
    pub fn states(&self) -> &[T] {
        &self.states
    }

    /// Probabilities aligned with [`states`](Self::states).
    #[inline]
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Number of states.
    #[inline]
    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// True when the distribution has a single state (degenerate growth).
    #[inline]
    pub fn is_empty(&self) -> bool {
        false // invariant: at least one state
    }

    /// Mean growth rate `ḡ = Σ p_i g_i`.
    pub fn mean(&self) -> T {
        self.states
            .iter()
            .zip(&self.probs)
            .fold(T::zero(), |a, (&g, &p)| a + p * g)
    }

    /// Growth variance `Var[g̃] = Σ p_i (g_i − ḡ)²`.
    pub fn variance(&self) -> T {
        let mean = self.mean();
        self.states
            .iter()
            .zip(&self.probs)
            .fold(T::zero(), |a, (&g, &p)| {
                let d = g - mean;
                a + p * d * d
            })
    }
}

/// One stock of the model: its current (time-0) dividend, the discount rate
/// used to price it, and the distribution of its yearly dividend growth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawStockSpec<T>",
    into = "RawStockSpec<T>",
    bound(
        serialize = "T: Serialize",
        deserialize = "T: Deserialize<'de>"
    )
)]
pub struct StockSpec<T: Scalar = f64> {
    current_dividend: T,
    discount_rate: T,
    growth: GrowthDistribution<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
struct RawStockSpec<T: Scalar> {
    current_dividend: T,
    discount_rate: T,
    growth: GrowthDistribution<T>,
}

impl<T: Scalar> TryFrom<RawStockSpec<T>> for StockSpec<T> {
    type Error = ModelError;
    fn try_from(raw: RawStockSpec<T>) -> Result<Self, ModelError> {
        StockSpec::new(raw.current_dividend, raw.discount_rate, raw.growth)
    }
}

impl<T: Scalar> From<StockSpec<T>> for RawStockSpec<T> {
    fn from(s: StockSpec<T>) -> Self {
        RawStockSpec {
            current_dividend: s.current_dividend,
            discount_rate: s.discount_rate,
            growth: s.growth,
        }
    }
}

impl<T: Scalar> StockSpec<T> {
    /// Validates and builds a stock specification. The discount rate must be
    /// finite, above −1, and strictly above the mean growth rate; the current
    /// dividend must be positive.
    pub fn new(
        current_dividend: T,
        discount_rate: T,
        growth: GrowthDistribution<T>,
    ) -> Result<Self, ModelError> {
        if !current_dividend.is_finite() || current_dividend <= T::zero() {
            return Err(ModelError::InvalidDividend {
                value: current_dividend.to64(),
            });
        }
        if !discount_rate.is_finite() || discount_rate <= -T::one() {
            return Err(ModelError::InvalidDiscountRate {
                value: discount_rate.to64(),
            });
        }
        if discount_rate <= growth.mean() {
            return Err(ModelError::DiscountNotAboveGrowth {
                discount_rate: discount_rate.to64(),
                mean_growth: growth.mean().to64(),
            });
        }
        Ok(Self {
            current_dividend,
            discount_rate,
            growth,
        })
    }

    /// Time-0 dividend `d_0 > 0`.
    #[inline]
    pub fn current_dividend(&self) -> T {
        self.current_dividend
    }

    /// Discount rate `k > ḡ`.
    #[inline]
    pub fn discount_rate(&self) -> T {
        self.discount_rate
    }

    /// The growth-rate distribution.
    #[inline]
    pub fn growth(&self) -> &GrowthDistribution<T> {
        &self.growth
    }

    /// Mean growth rate `ḡ`.
    #[inline]
    pub fn mean_growth(&self) -> T {
        self.growth.mean()
    }

    /// Growth variance `Var[g̃]`.
    #[inline]
    pub fn growth_variance(&self) -> T {
        self.growth.variance()
    }
}

/// The two-stock model: per-stock specifications plus the joint probability
/// table of their yearly growth rates. Growth pairs are drawn independently
/// across years from this one table.
///
/// The table is stored row-major: `cell(i, l)` is the probability that stock A
/// grows at its state `i` while stock B grows at its state `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawJointGrowthModel<T>",
    into = "RawJointGrowthModel<T>",
    bound(
        serialize = "T: Serialize",
        deserialize = "T: Deserialize<'de>"
    )
)]
pub struct JointGrowthModel<T: Scalar = f64> {
    stock_a: StockSpec<T>,
    stock_b: StockSpec<T>,
    cells: Vec<T>, // row-major n_a x n_b
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
struct RawJointGrowthModel<T: Scalar> {
    stock_a: StockSpec<T>,
    stock_b: StockSpec<T>,
    joint_probs: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<RawJointGrowthModel<T>> for JointGrowthModel<T> {
    type Error = ModelError;
    fn try_from(raw: RawJointGrowthModel<T>) -> Result<Self, ModelError> {
        JointGrowthModel::new(raw.stock_a, raw.stock_b, raw.joint_probs)
    }
}

impl<T: Scalar> From<JointGrowthModel<T>> for RawJointGrowthModel<T> {
    fn from(m: JointGrowthModel<T>) -> Self {
        let n_b = m.stock_b.growth().len();
        let joint_probs = m
            .cells
            .chunks(n_b)
            .map(|row| row.to_vec())
            .collect();
        RawJointGrowthModel {
            stock_a: m.stock_a,
            stock_b: m.stock_b,
            joint_probs,
        }
    }
}

impl<T: Scalar> JointGrowthModel<T> {
    /// Validates and builds a joint model.
    ///
    /// The joint table must be `n_a × n_b` with finite non-negative cells
    /// summing to 1 (the strict/renormalize policy from the type docs
    /// applies). Row and column sums must agree with the per-stock marginal
    /// probabilities: deviations within the strict tolerance are accepted
    /// as-is, deviations below the renormalization tolerance replace the
    /// stated marginals with the table-derived ones, and anything larger is
    /// rejected.
    pub fn new(
        stock_a: StockSpec<T>,
        stock_b: StockSpec<T>,
        joint_probs: Vec<Vec<T>>,
    ) -> Result<Self, ModelError> {
        let n_a = stock_a.growth().len();
        let n_b = stock_b.growth().len();
        if joint_probs.len() != n_a || joint_probs.iter().any(|row| row.len() != n_b) {
            return Err(ModelError::JointShape {
                rows: joint_probs.len(),
                cols: joint_probs.first().map_or(0, |r| r.len()),
                n_a,
                n_b,
            });
        }
        let mut cells = Vec::with_capacity(n_a * n_b);
        for (i, row) in joint_probs.iter().enumerate() {
            for (l, &c) in row.iter().enumerate() {
                if !c.is_finite() || c < T::zero() {
                    return Err(ModelError::InvalidJointCell {
                        row: i,
                        col: l,
                        value: c.to64(),
                    });
                }
                cells.push(c);
            }
        }
        let sum = cells.iter().fold(T::zero(), |a, &c| a + c);
        if let Some(divisor) = normalization(sum, "joint")? {
            for c in &mut cells {
                *c = *c / divisor;
            }
        }

        // Marginal consistency between the table and the stated probabilities.
        let mut row_sums = vec![T::zero(); n_a];
        let mut col_sums = vec![T::zero(); n_b];
        for i in 0..n_a {
            for l in 0..n_b {
                let c = cells[i * n_b + l];
                row_sums[i] = row_sums[i] + c;
                col_sums[l] = col_sums[l] + c;
            }
        }
        let mut deviation = T::zero();
        for (sum, &stated) in row_sums.iter().zip(stock_a.growth().probs()) {
            deviation = deviation.max((*sum - stated).abs());
        }
        for (sum, &stated) in col_sums.iter().zip(stock_b.growth().probs()) {
            deviation = deviation.max((*sum - stated).abs());
        }

        let (stock_a, stock_b) = if deviation <= T::strict_tol() {
            (stock_a, stock_b)
        } else if deviation < T::renorm_tol() {
            // Adopt the table-derived marginals; revalidation keeps the
            // positivity invariant on the replacement probabilities.
            let a = StockSpec::new(
                stock_a.current_dividend(),
                stock_a.discount_rate(),
                GrowthDistribution::new(stock_a.growth().states().to_vec(), row_sums)?,
            )?;
            let b = StockSpec::new(
                stock_b.current_dividend(),
                stock_b.discount_rate(),
                GrowthDistribution::new(stock_b.growth().states().to_vec(), col_sums)?,
            )?;
            (a, b)
        } else {
            return Err(ModelError::MarginalMismatch {
                deviation: deviation.to64(),
                tolerance: T::renorm_tol().to64(),
            });
        };

        Ok(Self {
            stock_a,
            stock_b,
            cells,
        })
    }

    /// Builds a joint model from a table alone: the per-stock marginal
    /// probabilities are the row and column sums of `joint_probs`.
    ///
    /// This is the constructor of choice when the table is the primary datum
    /// (for example a table of empirical frequencies) and no independently
    /// stated marginals exist.
    #[allow(clippy::too_many_arguments)]
    pub fn from_joint_table(
        dividend_a: T,
        discount_a: T,
        states_a: Vec<T>,
        dividend_b: T,
        discount_b: T,
        states_b: Vec<T>,
        joint_probs: Vec<Vec<T>>,
    ) -> Result<Self, ModelError> {
        let n_a = states_a.len();
        let n_b = states_b.len();
        if joint_probs.len() != n_a || joint_probs.iter().any(|row| row.len() != n_b) {
            return Err(ModelError::JointShape {
                rows: joint_probs.len(),
                cols: joint_probs.first().map_or(0, |r| r.len()),
                n_a,
                n_b,
            });
        }
        let mut row_sums = vec![T::zero(); n_a];
        let mut col_sums = vec![T::zero(); n_b];
        for (i, row) in joint_probs.iter().enumerate() {
            for (l, &c) in row.iter().enumerate() {
                if !c.is_finite() || c < T::zero() {
                    return Err(ModelError::InvalidJointCell {
                        row: i,
                        col: l,
                        value: c.to64(),
                    });
                }
                row_sums[i] = row_sums[i] + c;
                col_sums[l] = col_sums[l] + c;
            }
        }
        let stock_a = StockSpec::new(
            dividend_a,
            discount_a,
            GrowthDistribution::new(states_a, row_sums)?,
        )?;
        let stock_b = StockSpec::new(
            dividend_b,
            discount_b,
            GrowthDistribution::new(states_b, col_sums)?,
        )?;
        Self::new(stock_a, stock_b, joint_probs)
    }

    /// Builds a two-point-per-stock surrogate matching the given growth means,
    /// variances, and covariance exactly.
    ///
    /// Each stock gets states `ḡ ± σ` with probability ½ each, and the joint
    /// table `¼ ± cov/(4 σ_a σ_b)` reproduces the covariance. Requires
    /// strictly positive variances and implied correlation in `[-1, 1]` (at
    /// ±1 two cells become zero, which is allowed).
    #[allow(clippy::too_many_arguments)]
    pub fn from_moments(
        dividend_a: T,
        discount_a: T,
        mean_a: T,
        var_a: T,
        dividend_b: T,
        discount_b: T,
        mean_b: T,
        var_b: T,
        covariance: T,
    ) -> Result<Self, ModelError> {
        if !(var_a > T::zero()) || !(var_b > T::zero()) {
            return Err(ModelError::NonPositiveVariance {
                var_a: var_a.to64(),
                var_b: var_b.to64(),
            });
        }
        let sd_a = var_a.sqrt();
        let sd_b = var_b.sqrt();
        let corr = covariance / (sd_a * sd_b);
        if !corr.is_finite() || corr.abs() > T::one() {
            return Err(ModelError::CorrelationOutOfRange {
                correlation: corr.to64(),
            });
        }
        let quarter = T::c(0.25);
        let tilt = covariance / (T::c(4.0) * sd_a * sd_b);
        let same = quarter + tilt;
        let diff = quarter - tilt;
        // Guard against sign flips from rounding when |corr| is exactly 1.
        let same = same.max(T::zero());
        let diff = diff.max(T::zero());
        let half = T::c(0.5);
        let stock_a = StockSpec::new(
            dividend_a,
            discount_a,
            GrowthDistribution::new(vec![mean_a - sd_a, mean_a + sd_a], vec![half, half])?,
        )?;
        let stock_b = StockSpec::new(
            dividend_b,
            discount_b,
            GrowthDistribution::new(vec![mean_b - sd_b, mean_b + sd_b], vec![half, half])?,
        )?;
        Self::new(
            stock_a,
            stock_b,
            vec![vec![same, diff], vec![diff, same]],
        )
    }

    /// Pairs a stock with itself: both marginals are `stock` and the joint
    /// table is diagonal (the two "stocks" always grow identically). Useful
    /// for consistency checks, since the price covariance must then equal the
    /// price variance.
    pub fn self_paired(stock: StockSpec<T>) -> Self {
        let n = stock.growth().len();
        let mut cells = vec![T::zero(); n * n];
        for (i, &p) in stock.growth().probs().iter().enumerate() {
            cells[i * n + i] = p;
        }
        Self {
            stock_a: stock.clone(),
            stock_b: stock,
            cells,
        }
    }

    /// Stock A's specification.
    #[inline]
    pub fn stock_a(&self) -> &StockSpec<T> {
        &self.stock_a
    }

    /// Stock B's specification.
    #[inline]
    pub fn stock_b(&self) -> &StockSpec<T> {
        &self.stock_b
    }

    /// The stock identified by `which`.
    #[inline]
    pub fn stock(&self, which: crate::error::Stock) -> &StockSpec<T> {
        match which {
            crate::error::Stock::A => &self.stock_a,
            crate::error::Stock::B => &self.stock_b,
        }
    }

    /// Joint probability that stock A takes state `i` and stock B state `l`.
    #[inline]
    pub fn cell(&self, i: usize, l: usize) -> T {
        self.cells[i * self.stock_b.growth().len() + l]
    }

    /// The joint table flattened row-major (rows = stock A states).
    #[inline]
    pub fn cells_row_major(&self) -> &[T] {
        &self.cells
    }

    /// Table dimensions `(n_a, n_b)`.
    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.stock_a.growth().len(), self.stock_b.growth().len())
    }
}

/// Closed-form price moments of a joint model, with existence flags.
///
/// Second moments exist only under the convergence conditions on the growth
/// law; when a condition fails the corresponding flag is `false` and the value
/// is `None` (serialized as `null`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PriceMoments<T: Scalar = f64> {
    /// Expected time-0 price of stock A.
    pub mean_a: T,
    /// Expected time-0 price of stock B.
    pub mean_b: T,
    /// Price variance of stock A, when it exists.
    pub var_a: Option<T>,
    /// Price variance of stock B, when it exists.
    pub var_b: Option<T>,
    /// Price covariance, when it exists.
    pub cov_ab: Option<T>,
    /// Whether stock A's price variance exists.
    pub variance_exists_a: bool,
    /// Whether stock B's price variance exists.
    pub variance_exists_b: bool,
    /// Whether the price covariance exists.
    pub covariance_exists: bool,
}
