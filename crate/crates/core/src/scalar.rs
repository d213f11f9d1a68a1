//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Models, metrics and statistical tests are written once over [`Scalar`]
//! and instantiated for `f32` and `f64`. Counts stay integral; only derived
//! quantities (probabilities, weights, statistics) use the scalar type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless for counts below 2^24 (f32) or 2^53 (f64).
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable as float")
    }

    fn to_f64_lossless(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `x * log2(x)` with the `0 log 0 = 0` convention.
pub(crate) fn xlog2x<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.log2()
    }
}
