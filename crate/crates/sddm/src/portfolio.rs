//! One-period returns and two-asset quadratic-utility portfolio selection.
//!
//! The chain from a joint growth model to portfolio weights:
//!
//! 1. [`PriceBasis`] bundles the time-0 price moments with the growth
//!    parameters (either derived from a [`JointGrowthModel`] or supplied
//!    directly, e.g. from quoted intermediate values);
//! 2. the time-1 price moments follow from the recursion
//!    `P̃_1 = (1+k)P̃_0 − d̃_1` applied to each stock;
//! 3. one-period returns `r̃ = (P̃_1 − P̄_0)/P̄_0` give [`ReturnMoments`];
//! 4. maximizing `E[r̃_p] − (α/2)·E[r̃_p²]` over the weight `x` of stock A
//!    yields the closed-form [`optimal_weight`], with
//!    [`min_variance_weight`] as the pure risk-minimizing benchmark.

use serde::{Deserialize, Serialize};

use crate::error::{MomentError, PortfolioError, Stock};
use crate::model::JointGrowthModel;
use crate::scalar::Scalar;

/// Denominators below this are treated as degenerate optimization problems.
pub const DEGENERACY_THRESHOLD: f64 = 1e-15;

/// Time-0 price moments plus the growth/discount parameters needed to roll
/// them one year forward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PriceBasis<T: Scalar = f64> {
    dividend: [T; 2],
    discount: [T; 2],
    growth_mean: [T; 2],
    growth_var: [T; 2],
    growth_cov: T,
    price_mean: [T; 2],
    price_var: [T; 2],
    price_cov: T,
}

impl<T: Scalar> PriceBasis<T> {
    /// Derives the basis from a joint model's closed forms. Fails when a
    /// required second moment does not exist.
    pub fn from_model(m: &JointGrowthModel<T>) -> Result<Self, MomentError> {
        Ok(Self {
            dividend: [
                m.stock_a().current_dividend(),
                m.stock_b().current_dividend(),
            ],
            discount: [m.stock_a().discount_rate(), m.stock_b().discount_rate()],
            growth_mean: [m.stock_a().mean_growth(), m.stock_b().mean_growth()],
            growth_var: [m.stock_a().growth_variance(), m.stock_b().growth_variance()],
            growth_cov: m.growth_covariance(),
            price_mean: [m.stock_a().expected_price(), m.stock_b().expected_price()],
            price_var: [m.price_variance(Stock::A)?, m.price_variance(Stock::B)?],
            price_cov: m.price_covariance()?,
        })
    }

    /// Builds the basis from externally supplied values (for instance rounded
    /// figures quoted in a report), validating only basic well-formedness:
    /// positive dividends and prices, discount above mean growth, and
    /// non-negative variances.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        dividend: [T; 2],
        discount: [T; 2],
        growth_mean: [T; 2],
        growth_var: [T; 2],
        growth_cov: T,
        price_mean: [T; 2],
        price_var: [T; 2],
        price_cov: T,
    ) -> Result<Self, PortfolioError> {
        let all_finite = dividend
            .iter()
            .chain(&discount)
            .chain(&growth_mean)
            .chain(&growth_var)
            .chain(&price_mean)
            .chain(&price_var)
            .chain([&growth_cov, &price_cov])
            .all(|v| v.is_finite());
        let well_formed = all_finite
            && (0..2).all(|i| {
                dividend[i] > T::zero()
                    && price_mean[i] > T::zero()
                    && discount[i] > growth_mean[i]
                    && growth_var[i] >= T::zero()
                    && price_var[i] >= T::zero()
            });
        if !well_formed {
            return Err(PortfolioError::InvalidBasis);
        }
        Ok(Self {
            dividend,
            discount,
            growth_mean,
            growth_var,
            growth_cov,
            price_mean,
            price_var,
            price_cov,
        })
    }

    #[inline]
    fn idx(which: Stock) -> usize {
        match which {
            Stock::A => 0,
            Stock::B => 1,
        }
    }

    /// Covariance of the two growth rates.
    #[inline]
    pub fn growth_covariance(&self) -> T {
        self.growth_cov
    }

    /// Time-0 expected price of one stock.
    #[inline]
    pub fn price_mean(&self, which: Stock) -> T {
        self.price_mean[Self::idx(which)]
    }

    /// Time-0 price variance of one stock.
    #[inline]
    pub fn price_variance(&self, which: Stock) -> T {
        self.price_var[Self::idx(which)]
    }

    /// Time-0 price covariance.
    #[inline]
    pub fn price_covariance(&self) -> T {
        self.price_cov
    }

    /// Covariance of growth rates `Cov[g̃_m, g̃_l]` (the variance when
    /// `m == l`).
    fn growth_cov_pair(&self, m: Stock, l: Stock) -> T {
        if m == l {
            self.growth_var[Self::idx(m)]
        } else {
            self.growth_cov
        }
    }

    /// Expected time-1 price from the recursion
    /// `P̄_1 = (1+k)·P̄_0 − d_0(1+ḡ)`.
    pub fn price_t1_mean(&self, which: Stock) -> T {
        let i = Self::idx(which);
        (T::one() + self.discount[i]) * self.price_mean[i]
            - self.dividend[i] * (T::one() + self.growth_mean[i])
    }

    /// Covariance between next year's dividend of stock `m` and the time-0
    /// price of stock `l`:
    /// `Cov[d̃_m1, P̃_l0] = d_m0 · Cov[g̃_m, g̃_l]/(1+ḡ_l) · P̄_l0`.
    pub fn dividend_price_covariance(&self, m: Stock, l: Stock) -> T {
        let mi = Self::idx(m);
        let li = Self::idx(l);
        self.dividend[mi] * self.growth_cov_pair(m, l) / (T::one() + self.growth_mean[li])
            * self.price_mean[li]
    }

    /// Time-1 price variance from the recursion:
    /// `Var[P̃_1] = (1+k)²Var[P̃_0] − 2(1+k)Cov[d̃_1, P̃_0] + d_0²Var[g̃]`.
    pub fn price_t1_variance(&self, which: Stock) -> T {
        let i = Self::idx(which);
        let k1 = T::one() + self.discount[i];
        k1 * k1 * self.price_var[i]
            - T::c(2.0) * k1 * self.dividend_price_covariance(which, which)
            + self.dividend[i] * self.dividend[i] * self.growth_var[i]
    }

    /// Time-1 price covariance from the recursion:
    /// `Cov[P̃_A1, P̃_B1] = (1+k_A)(1+k_B)Cov[P̃_A0, P̃_B0]
    ///   − (1+k_A)Cov[d̃_B1, P̃_A0] − (1+k_B)Cov[d̃_A1, P̃_B0]
    ///   + d_A0 d_B0 Cov[g̃_A, g̃_B]`.
    pub fn price_t1_covariance(&self) -> T {
        let ka1 = T::one() + self.discount[0];
        let kb1 = T::one() + self.discount[1];
        ka1 * kb1 * self.price_cov
            - ka1 * self.dividend_price_covariance(Stock::B, Stock::A)
            - kb1 * self.dividend_price_covariance(Stock::A, Stock::B)
            + self.dividend[0] * self.dividend[1] * self.growth_cov
    }

    /// Moments of the one-period returns `r̃_m = (P̃_m1 − P̄_m0)/P̄_m0`.
    ///
    /// On an exact basis the mean return equals the mean growth rate up to
    /// rounding, because `P̄_1 = (1+ḡ)P̄_0` is an identity of the closed
    /// forms.
    pub fn return_moments(&self) -> Result<ReturnMoments<T>, PortfolioError> {
        let mean = |s: Stock| (self.price_t1_mean(s) - self.price_mean(s)) / self.price_mean(s);
        ReturnMoments::new(
            mean(Stock::A),
            mean(Stock::B),
            self.price_t1_variance(Stock::A) / (self.price_mean[0] * self.price_mean[0]),
            self.price_t1_variance(Stock::B) / (self.price_mean[1] * self.price_mean[1]),
            self.price_t1_covariance() / (self.price_mean[0] * self.price_mean[1]),
        )
    }
}

impl<T: Scalar> JointGrowthModel<T> {
    /// One-period return moments implied by the model's closed-form price
    /// moments. Fails when a required second moment does not exist.
    pub fn return_moments(&self) -> Result<ReturnMoments<T>, MomentError> {
        let basis = PriceBasis::from_model(self)?;
        Ok(basis
            .return_moments()
            .expect("moments from a valid model basis are well-formed"))
    }
}

/// Means, variances, and covariance of the two one-period returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawReturnMoments<T>",
    bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>")
)]
pub struct ReturnMoments<T: Scalar = f64> {
    pub mean_a: T,
    pub mean_b: T,
    pub var_a: T,
    pub var_b: T,
    pub cov_ab: T,
}

/// Accepts extra fields so that richer moment reports (e.g. ones carrying
/// existence flags) can be fed back in as long as the five numbers are
/// present and non-null.
#[derive(Debug, Clone, Deserialize)]
struct RawReturnMoments<T> {
    mean_a: T,
    mean_b: T,
    var_a: T,
    var_b: T,
    cov_ab: T,
}

impl<T: Scalar> TryFrom<RawReturnMoments<T>> for ReturnMoments<T> {
    type Error = PortfolioError;
    fn try_from(raw: RawReturnMoments<T>) -> Result<Self, PortfolioError> {
        ReturnMoments::new(raw.mean_a, raw.mean_b, raw.var_a, raw.var_b, raw.cov_ab)
    }
}

impl<T: Scalar> ReturnMoments<T> {
    /// Validates: all finite, variances non-negative, and the covariance
    /// bounded by the variance product (with a sliver of rounding slack).
    pub fn new(mean_a: T, mean_b: T, var_a: T, var_b: T, cov_ab: T) -> Result<Self, PortfolioError> {
        let finite = [mean_a, mean_b, var_a, var_b, cov_ab]
            .iter()
            .all(|v| v.is_finite());
        let slack = T::one() + T::renorm_tol();
        if !finite
            || var_a < T::zero()
            || var_b < T::zero()
            || cov_ab * cov_ab > var_a * var_b * slack
        {
            return Err(PortfolioError::InvalidMoments);
        }
        Ok(Self {
            mean_a,
            mean_b,
            var_a,
            var_b,
            cov_ab,
        })
    }

    /// Portfolio mean return at weight `x` on stock A.
    #[inline]
    pub fn portfolio_mean(&self, x: T) -> T {
        x * self.mean_a + (T::one() - x) * self.mean_b
    }

    /// Portfolio return variance at weight `x` on stock A.
    #[inline]
    pub fn portfolio_variance(&self, x: T) -> T {
        let y = T::one() - x;
        x * x * self.var_a + T::c(2.0) * x * y * self.cov_ab + y * y * self.var_b
    }
}

/// A fully-invested two-asset portfolio (`x_a + x_b = 1`, short positions
/// allowed) with its return moments and, when a risk aversion was involved,
/// the achieved expected utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PortfolioResult<T: Scalar = f64> {
    /// Weight on stock A.
    pub x_a: T,
    /// Weight on stock B (`1 − x_a`).
    pub x_b: T,
    /// Expected portfolio return.
    pub expected_return: T,
    /// Portfolio return variance.
    pub variance: T,
    /// Expected quadratic utility at `alpha`, when applicable.
    pub expected_utility: Option<T>,
    /// Risk aversion used, when applicable.
    pub alpha: Option<T>,
}

/// Expected quadratic utility `E[u] = r̄ − (α/2)(Var + r̄²)` of the portfolio
/// with weight `x` on stock A.
pub fn expected_utility<T: Scalar>(rm: &ReturnMoments<T>, x: T, alpha: T) -> T {
    let mean = rm.portfolio_mean(x);
    mean - alpha / T::c(2.0) * (rm.portfolio_variance(x) + mean * mean)
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<(), PortfolioError> {
    if !alpha.is_finite() || alpha <= T::zero() {
        return Err(PortfolioError::InvalidAlpha {
            alpha: alpha.to64(),
        });
    }
    Ok(())
}

/// Closed-form maximizer of expected quadratic utility over the weight on
/// stock A:
/// `x* = (Δ/α − Cov + Var_B − r̄_B·Δ) / ((Var_A − 2Cov + Var_B) + Δ²)`
/// with `Δ = r̄_A − r̄_B`. Fails when the denominator falls below
/// [`DEGENERACY_THRESHOLD`] (two effectively identical assets).
pub fn optimal_weight<T: Scalar>(rm: &ReturnMoments<T>, alpha: T) -> Result<T, PortfolioError> {
    check_alpha(alpha)?;
    let delta = rm.mean_a - rm.mean_b;
    let spread = rm.var_a - T::c(2.0) * rm.cov_ab + rm.var_b;
    let denominator = spread + delta * delta;
    if denominator < T::c(DEGENERACY_THRESHOLD) {
        return Err(PortfolioError::DegenerateProblem {
            denominator: denominator.to64(),
            minimum: DEGENERACY_THRESHOLD,
        });
    }
    Ok((delta / alpha - rm.cov_ab + rm.var_b - rm.mean_b * delta) / denominator)
}

/// [`optimal_weight`] clamped to the `[0, 1]` box (no short positions). The
/// clamp is exact for this concave objective: the constrained maximizer is
/// the projection of the unconstrained one.
pub fn optimal_weight_boxed<T: Scalar>(rm: &ReturnMoments<T>, alpha: T) -> Result<T, PortfolioError> {
    optimal_weight(rm, alpha).map(|x| x.max(T::zero()).min(T::one()))
}

/// Weight minimizing portfolio return variance:
/// `x = (Var_B − Cov) / (Var_A − 2Cov + Var_B)`.
pub fn min_variance_weight<T: Scalar>(rm: &ReturnMoments<T>) -> Result<T, PortfolioError> {
    let denominator = rm.var_a - T::c(2.0) * rm.cov_ab + rm.var_b;
    if denominator < T::c(DEGENERACY_THRESHOLD) {
        return Err(PortfolioError::DegenerateProblem {
            denominator: denominator.to64(),
            minimum: DEGENERACY_THRESHOLD,
        });
    }
    Ok((rm.var_b - rm.cov_ab) / denominator)
}

/// Assembles the full result record for the portfolio with weight `x_a`,
/// including utility when a risk aversion is given.
pub fn portfolio_at<T: Scalar>(rm: &ReturnMoments<T>, x_a: T, alpha: Option<T>) -> PortfolioResult<T> {
    PortfolioResult {
        x_a,
        x_b: T::one() - x_a,
        expected_return: rm.portfolio_mean(x_a),
        variance: rm.portfolio_variance(x_a),
        expected_utility: alpha.map(|a| expected_utility(rm, x_a, a)),
        alpha,
    }
}

/// True when the optimum sits where quadratic utility is decreasing in
/// wealth: `r̄(x) + 3σ(x) > 1/α`. Callers should warn the user, since the
/// quadratic objective is only economically sensible below its bliss point.
pub fn utility_domain_violated<T: Scalar>(rm: &ReturnMoments<T>, x: T, alpha: T) -> bool {
    rm.portfolio_mean(x) + T::c(3.0) * rm.portfolio_variance(x).sqrt() > T::one() / alpha
}

/// How grid points are spaced between the endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    Log,
    Linear,
}

/// An inclusive grid of risk-aversion values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct AlphaGrid<T: Scalar = f64> {
    pub lo: T,
    pub hi: T,
    pub points: usize,
    pub spacing: GridSpacing,
}

impl<T: Scalar> Default for AlphaGrid<T> {
    /// 60 log-spaced points from 0.1 to 1000.
    fn default() -> Self {
        AlphaGrid {
            lo: T::c(0.1),
            hi: T::c(1000.0),
            points: 60,
            spacing: GridSpacing::Log,
        }
    }
}

impl<T: Scalar> AlphaGrid<T> {
    /// Materializes the grid. Requires finite `0 < lo ≤ hi` and at least one
    /// point (at least two when `lo < hi`).
    pub fn values(&self) -> Result<Vec<T>, PortfolioError> {
        let invalid = PortfolioError::InvalidGrid {
            points: self.points,
            required: if self.lo < self.hi { 2 } else { 1 },
        };
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo <= T::zero() || self.lo > self.hi
        {
            return Err(invalid);
        }
        match self.points {
            0 => Err(invalid),
            1 if self.lo == self.hi => Ok(vec![self.lo]),
            1 => Err(invalid),
            n => {
                let steps = T::from_usize(n - 1).expect("grid size converts");
                let values = (0..n)
                    .map(|i| {
                        let f = T::from_usize(i).expect("grid index converts") / steps;
                        match self.spacing {
                            GridSpacing::Linear => self.lo + f * (self.hi - self.lo),
                            GridSpacing::Log => {
                                (self.lo.ln() + f * (self.hi.ln() - self.lo.ln())).exp()
                            }
                        }
                    })
                    .collect();
                Ok(values)
            }
        }
    }
}

/// Optimal portfolios across a grid of risk aversions, in grid order.
pub fn alpha_sweep<T: Scalar>(
    rm: &ReturnMoments<T>,
    grid: &AlphaGrid<T>,
) -> Result<Vec<PortfolioResult<T>>, PortfolioError> {
    let mut results = Vec::new();
    for alpha in grid.values()? {
        let x = optimal_weight(rm, alpha)?;
        results.push(portfolio_at(rm, x, Some(alpha)));
    }
    Ok(results)
}
