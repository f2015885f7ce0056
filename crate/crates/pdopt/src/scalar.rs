//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point type. `f64` is what the benchmark harness uses; `f32` works
//! for everything that does not fight its 24-bit mantissa.

use num_traits::Float;
use rustfft::FftNum;
use std::fmt::{Display, LowerExp};
use std::iter::Sum;

pub trait Scalar: Float + FftNum + Sum + Display + LowerExp {
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar type cannot convert to f64")
    }
}

impl<T> Scalar for T where T: Float + FftNum + Sum + Display + LowerExp {}

/// Shorthand used all over the crate bodies: `real::<T>(0.5)`.
#[inline]
pub fn real<T: Scalar>(x: f64) -> T {
    num_traits::FromPrimitive::from_f64(x).expect("scalar type cannot represent f64 constant")
}
