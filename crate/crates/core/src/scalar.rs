//! Scalar abstraction over the floating-point types the toolkit runs on.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numeric pipeline is generic over (f32 or f64).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy cast from f64. Panics only for values a float type cannot
    /// represent at all, which does not happen for finite inputs.
    fn cast(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any float scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("float scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cast_round_trips_for_f64() {
        let x = 0.123456789012345_f64;
        assert_eq!(<f64 as Scalar>::cast(x), x);
    }

    #[test]
    fn cast_truncates_for_f32() {
        let x = <f32 as Scalar>::cast(1.0 / 3.0);
        assert!((x.to_f64_lossy() - 1.0 / 3.0).abs() < 1e-7);
    }
}
