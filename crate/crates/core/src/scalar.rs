//! Scalar abstraction shared by the physics model and the network engine.

use std::fmt::{Debug, Display};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type the simulator and the networks are generic over.
///
/// Implemented for `f32` (fast training) and `f64` (oracle checks, gradient
/// verification).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly
    /// rounded) in both supported types, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Scalar>(theta: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut t = theta % two_pi;
    if t <= -T::PI() {
        t = t + two_pi;
    } else if t > T::PI() {
        t = t - two_pi;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_lands_in_half_open_interval() {
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-1.5 * PI) - 0.5 * PI).abs() < 1e-12);
        assert!((wrap_angle(2.5 * PI) - 0.5 * PI).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_eq!(wrap_angle(-2.0 * PI), 0.0);
    }

    #[test]
    fn lit_roundtrips_f32() {
        assert_eq!(<f32 as Scalar>::lit(0.5), 0.5f32);
    }
}
