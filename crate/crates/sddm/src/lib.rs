//! A stochastic dividend discount model for pairs of stocks.
//!
//! Dividends grow by a yearly rate drawn from a discrete joint distribution,
//! independently across years; prices are discounted present values of the
//! dividend stream. The crate provides:
//!
//! * [`model`] — validated domain types: growth distributions, stock
//!   specifications, and the two-stock joint model (JSON-serializable);
//! * [`moments`] — closed-form price means, variances, and the price
//!   covariance, with explicit existence conditions;
//! * [`oracle`] — independent numeric cross-checks: exact enumeration of
//!   dividend cross-moments, truncated series with a geometric tail bound,
//!   and a deterministic, parallel Monte Carlo simulator;
//! * [`estimate`] — data pipeline from dividend/price histories to model
//!   inputs: summary statistics, two-point discretizations, joint tables,
//!   OLS betas, and CAPM discount rates;
//! * [`portfolio`] — one-period return moments and closed-form two-asset
//!   quadratic-utility optimization.
//!
//! Model and oracle layers are generic over the floating-point type through
//! [`Scalar`]; the expected default is `f64` (aliases below). The estimation
//! layer is concrete in `f64` since it faces data formats.
//!
//! # Example
//!
//! ```
//! use sddm::model::JointGrowthModel;
//! use sddm::portfolio::{optimal_weight};
//!
//! // Two-point growth surrogate from moments: dividends, discount rates,
//! // growth means/variances, and the growth covariance.
//! let m = JointGrowthModel::from_moments(
//!     0.5, 0.06631, 0.02, 0.02431,
//!     1.24, 0.07943, 0.0234, 0.01447,
//!     0.000434,
//! ).unwrap();
//! let pm = m.price_moments();
//! assert!(pm.covariance_exists);
//! let rm = m.return_moments().unwrap();
//! let x = optimal_weight(&rm, 2.0).unwrap();
//! assert!(x > 0.0 && x < 1.0);
//! ```

pub mod error;
pub mod estimate;
pub mod model;
pub mod moments;
pub mod oracle;
pub mod portfolio;
pub mod scalar;

pub use error::{
    BucketSide, EstimateError, ModelError, MomentError, OracleError, PortfolioError, Stock,
};
pub use model::{GrowthDistribution, JointGrowthModel, PriceMoments, StockSpec};
pub use oracle::{McPriceMoments, MomentEstimate, SimConfig};
pub use portfolio::{AlphaGrid, GridSpacing, PortfolioResult, PriceBasis, ReturnMoments};
pub use scalar::Scalar;

/// `f64` growth distribution (the default precision).
pub type GrowthDistribution64 = GrowthDistribution<f64>;
/// `f32` growth distribution.
pub type GrowthDistribution32 = GrowthDistribution<f32>;
/// `f64` stock specification.
pub type StockSpec64 = StockSpec<f64>;
/// `f32` stock specification.
pub type StockSpec32 = StockSpec<f32>;
/// `f64` joint model (the default precision).
pub type JointGrowthModel64 = JointGrowthModel<f64>;
/// `f32` joint model.
pub type JointGrowthModel32 = JointGrowthModel<f32>;
/// `f64` price moments.
pub type PriceMoments64 = PriceMoments<f64>;
/// `f64` return moments.
pub type ReturnMoments64 = ReturnMoments<f64>;
