//! Scalar abstraction shared by the exact model code and the closed-form bounds.
//!
//! [`Scalar`] covers ordered fields (f32, f64 and [`Rational64`]) and is all the
//! model evaluator and the polynomial bounds need. [`Real`] adds the
//! transcendental operations used by the quantum bounds and min-entropy.

use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Ordered field element usable for exact or floating-point model arithmetic.
pub trait Scalar:
    Num + Signed + PartialOrd + Copy + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `num / den`, exact for rational scalars.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("integer fits scalar") / Self::from_i64(den).expect("integer fits scalar")
    }

    /// Conversion from an `f64` literal. Rational scalars take the exact binary value
    /// when it is representable, otherwise the nearest approximation `num-rational` finds.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite value fits scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }

    fn quarter() -> Self {
        Self::ratio(1, 4)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for Rational64 {}

/// Floating-point scalar.
pub trait Real: Scalar + Float {}

impl<T: Scalar + Float> Real for T {}

pub(crate) fn max<T: PartialOrd>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub(crate) fn min<T: PartialOrd>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// `|a|` without the `Float`/`Signed` method ambiguity.
pub(crate) fn abs<T: Signed>(a: T) -> T {
    Signed::abs(&a)
}
