//! Floating-point abstraction used by the model and oracle layers.
//!
//! Everything numeric in this crate is generic over [`Scalar`], which is any
//! IEEE float with the conversions needed for constants and reporting. The
//! crate root exports `f32`/`f64` aliases for the main types.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate (`f32` or `f64`, or any
/// type implementing the same numeric traits).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant into `Self` (rounding if narrower).
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant converts to scalar")
    }

    /// Converts `self` to `f64` for reporting and cross-type aggregation.
    #[inline]
    fn to64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Machine epsilon of the concrete type, as `f64`.
    #[inline]
    fn eps64() -> f64 {
        Self::epsilon().to_f64().expect("epsilon converts to f64")
    }

    /// Absolute tolerance for treating a probability sum as exactly 1.
    ///
    /// `1e-12` for `f64`; wider types scale with machine epsilon.
    #[inline]
    fn strict_tol() -> Self {
        Self::c(f64::max(1e-12, Self::eps64() * 16.0))
    }

    /// Largest probability-sum drift that is silently renormalized; larger
    /// drifts are rejected as data errors.
    #[inline]
    fn renorm_tol() -> Self {
        Self::c(f64::max(1e-9, Self::eps64() * 1e4))
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}
