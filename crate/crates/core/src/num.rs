//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the toolkit is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Widening conversion used for reporting and file encodings.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Logistic sigmoid.
pub fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Inverse of [`sigmoid`]; maps 0 and 1 to ±inf.
pub fn logit<T: Real>(p: T) -> T {
    (p / (T::one() - p)).ln()
}

/// ITU-R BT.601 luma of an RGB triple.
#[inline]
pub fn luma<T: Real>(r: T, g: T, b: T) -> T {
    T::lit(0.299) * r + T::lit(0.587) * g + T::lit(0.114) * b
}
