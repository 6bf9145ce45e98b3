//! Closed-form price moments of the dividend-growth model.
//!
//! Prices are present values of the random dividend stream: with yearly
//! growth drawn independently over time, the expected price has the familiar
//! form `P̄ = d₀(1+ḡ)/(k−ḡ)`, and second moments exist only when the growth
//! dispersion is small enough relative to the discount rate:
//!
//! * variance exists iff `Var[g̃] < (1+k)² − (1+ḡ)²`;
//! * covariance exists iff `|E[(1+g̃_A)(1+g̃_B)]| < (1+k_A)(1+k_B)`.
//!
//! The cross-moment of dividends at different dates collapses to a product of
//! powers via the risk-adjusted growth rate `G_m = ḡ_m + Cov[g̃_A,g̃_B]/(1+ḡ_l)`,
//! which is what [`JointGrowthModel::dividend_product_expectation`] evaluates
//! and the covariance closed form sums.

use crate::error::{MomentError, Stock};
use crate::model::{JointGrowthModel, PriceMoments, StockSpec};
use crate::scalar::Scalar;

impl<T: Scalar> StockSpec<T> {
    /// Expected time-0 price `P̄ = d₀(1+ḡ)/(k−ḡ)`.
    ///
    /// Always finite: construction guarantees `k > ḡ`.
    pub fn expected_price(&self) -> T {
        let g = self.mean_growth();
        self.current_dividend() * (T::one() + g) / (self.discount_rate() - g)
    }

    /// Upper bound that `Var[g̃]` must stay below for the price variance to
    /// exist: `(1+k)² − (1+ḡ)²`.
    pub fn variance_bound(&self) -> T {
        let k1 = T::one() + self.discount_rate();
        let g1 = T::one() + self.mean_growth();
        k1 * k1 - g1 * g1
    }

    /// Whether the price variance exists (`Var[g̃]` strictly below the bound).
    pub fn variance_exists(&self) -> bool {
        self.growth_variance() < self.variance_bound()
    }

    /// Closed-form price variance
    /// `Var[P̃] = Var[g̃]/((1+k)² − (1+ḡ)² − Var[g̃]) · (1+k)²/(1+ḡ)² · P̄²`.
    pub fn price_variance(&self) -> Result<T, MomentError> {
        let var_g = self.growth_variance();
        let bound = self.variance_bound();
        if !(var_g < bound) {
            return Err(MomentError::VarianceNonConvergent {
                stock: Stock::A,
                growth_variance: var_g.to64(),
                bound: bound.to64(),
            });
        }
        let k1 = T::one() + self.discount_rate();
        let g1 = T::one() + self.mean_growth();
        let p = self.expected_price();
        Ok(var_g / (bound - var_g) * (k1 * k1) / (g1 * g1) * p * p)
    }
}

impl<T: Scalar> JointGrowthModel<T> {
    /// Covariance of the two growth rates under the joint table,
    /// `Cov[g̃_A, g̃_B] = Σ_{i,l} π_il (g_i − ḡ_A)(g_l − ḡ_B)`.
    pub fn growth_covariance(&self) -> T {
        let mean_a = self.stock_a().mean_growth();
        let mean_b = self.stock_b().mean_growth();
        let states_a = self.stock_a().growth().states();
        let states_b = self.stock_b().growth().states();
        let (n_a, n_b) = self.shape();
        let mut cov = T::zero();
        for i in 0..n_a {
            let da = states_a[i] - mean_a;
            for l in 0..n_b {
                cov = cov + self.cell(i, l) * da * (states_b[l] - mean_b);
            }
        }
        cov
    }

    /// The joint growth factor `E[(1+g̃_A)(1+g̃_B)] = (1+ḡ_A)(1+ḡ_B) + Cov[g̃_A,g̃_B]`.
    ///
    /// Always strictly positive: it is the expectation of a product of two
    /// positive random variables.
    pub fn joint_growth_factor(&self) -> T {
        let a1 = T::one() + self.stock_a().mean_growth();
        let b1 = T::one() + self.stock_b().mean_growth();
        a1 * b1 + self.growth_covariance()
    }

    /// Risk-adjusted growth rate `G_m = ḡ_m + Cov[g̃_A,g̃_B]/(1+ḡ_l)` where `l`
    /// is the other stock. Satisfies `(1+G_m)(1+ḡ_l) = E[(1+g̃_A)(1+g̃_B)]`.
    pub fn risk_adjusted_growth(&self, which: Stock) -> T {
        let own = self.stock(which).mean_growth();
        let other = self.stock(which.other()).mean_growth();
        own + self.growth_covariance() / (T::one() + other)
    }

    /// Exact cross-moment of dividends `E[d̃_Aj · d̃_Bp]` for lags `j, p ≥ 0`.
    ///
    /// Equals `d_A0 d_B0 (1+G_A)^j (1+ḡ_B)^p` when `j ≤ p` and the symmetric
    /// expression when `j > p`; the common years contribute the joint factor
    /// and the overhang only the marginal growth.
    pub fn dividend_product_expectation(&self, j: u32, p: u32) -> T {
        let d = self.stock_a().current_dividend() * self.stock_b().current_dividend();
        let one = T::one();
        if j <= p {
            let ga = one + self.risk_adjusted_growth(Stock::A);
            let gb = one + self.stock_b().mean_growth();
            d * ga.powi(j as i32) * gb.powi(p as i32)
        } else {
            let gb = one + self.risk_adjusted_growth(Stock::B);
            let ga = one + self.stock_a().mean_growth();
            d * gb.powi(p as i32) * ga.powi(j as i32)
        }
    }

    /// Upper bound that `|E[(1+g̃_A)(1+g̃_B)]|` must stay below for the price
    /// covariance to exist: `(1+k_A)(1+k_B)`.
    pub fn covariance_bound(&self) -> T {
        (T::one() + self.stock_a().discount_rate()) * (T::one() + self.stock_b().discount_rate())
    }

    /// Whether the price covariance exists.
    pub fn covariance_exists(&self) -> bool {
        self.joint_growth_factor().abs() < self.covariance_bound()
    }

    /// Closed-form price covariance
    /// `Cov[P̃_A, P̃_B] = Cov[g̃]/D · (1+k_A)(1+k_B)/((1+ḡ_A)(1+ḡ_B)) · P̄_A P̄_B`
    /// with `D = (1+k_A)(1+k_B) − E[(1+g̃_A)(1+g̃_B)]`.
    pub fn price_covariance(&self) -> Result<T, MomentError> {
        let jf = self.joint_growth_factor();
        let bound = self.covariance_bound();
        if !(jf.abs() < bound) {
            return Err(MomentError::CovarianceNonConvergent {
                joint_factor: jf.to64(),
                bound: bound.to64(),
            });
        }
        let denom = bound - jf;
        let a1 = T::one() + self.stock_a().mean_growth();
        let b1 = T::one() + self.stock_b().mean_growth();
        let pa = self.stock_a().expected_price();
        let pb = self.stock_b().expected_price();
        Ok(self.growth_covariance() / denom * bound / (a1 * b1) * pa * pb)
    }

    /// Price variance of one stock of the pair.
    pub fn price_variance(&self, which: Stock) -> Result<T, MomentError> {
        self.stock(which).price_variance().map_err(|e| match e {
            MomentError::VarianceNonConvergent {
                growth_variance,
                bound,
                ..
            } => MomentError::VarianceNonConvergent {
                stock: which,
                growth_variance,
                bound,
            },
            other => other,
        })
    }

    /// All closed-form price moments with existence flags. Never fails: a
    /// moment that does not exist is reported as `None` with its flag `false`.
    pub fn price_moments(&self) -> PriceMoments<T> {
        let var_a = self.price_variance(Stock::A).ok();
        let var_b = self.price_variance(Stock::B).ok();
        let cov_ab = self.price_covariance().ok();
        PriceMoments {
            mean_a: self.stock_a().expected_price(),
            mean_b: self.stock_b().expected_price(),
            variance_exists_a: var_a.is_some(),
            variance_exists_b: var_b.is_some(),
            covariance_exists: cov_ab.is_some(),
            var_a,
            var_b,
            cov_ab,
        }
    }
}
