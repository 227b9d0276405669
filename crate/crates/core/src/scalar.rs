//! Floating-point scalar abstraction.
//!
//! All numerics in this crate are generic over [`Scalar`], which is any
//! IEEE float with the arithmetic, casting and threading bounds the
//! spectral kernels need. `f32` and `f64` implement it; the concrete
//! aliases at the crate root pick one.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed};

/// Floating point scalar: `f32` or `f64`.
///
/// The `Signed + FromPrimitive + Send + Sync + 'static` bounds make every
/// `Scalar` an `rustfft::FftNum`, so spectral transforms come for free.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + Signed
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Cast a literal or config value. Panics only if the value is not
    /// representable, which cannot happen for finite `f64` into `f32`/`f64`
    /// (overflow saturates to infinity rather than failing).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 value not representable in scalar type")
    }

    /// Lossy widening to `f64` for reports and error messages.
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn casts_round_trip() {
        assert_eq!(f64::of(0.25), 0.25);
        assert_eq!(f32::of(0.25), 0.25f32);
        assert_eq!(1.5f64.to_f64_lossy(), 1.5);
    }

    #[test]
    fn f32_overflow_saturates() {
        assert!(f32::of(1e300).is_infinite());
    }
}
