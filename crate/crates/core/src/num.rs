//! Scalar types for the numeric analytics.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type usable for distances, ranks and latencies.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {
    /// Lossless conversion from a stored `f64` attribute for `f64`, rounding for narrower types.
    fn from_attr(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    fn to_wire(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean of a non-empty slice, summed left to right.
pub fn mean<T: Scalar>(xs: impl ExactSizeIterator<Item = T>) -> Option<T> {
    let n = xs.len();
    if n == 0 {
        return None;
    }
    let sum = xs.fold(T::zero(), |acc, x| acc + x);
    Some(sum / T::from_usize(n)?)
}
