//! Scalar abstraction for exact and floating well bookkeeping.

use num_rational::Rational64;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use std::fmt::Debug;

/// Field-like scalar usable for well families: `f64` or exact rationals.
pub trait Scalar:
    Clone + Debug + PartialEq + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn half() -> Self {
        Self::one() / Self::from_i32(2).expect("2 is representable")
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Clone + Debug + PartialEq + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Exact rational scalar used for symbolic checks.
pub type Exact = Rational64;
