//! Scalar abstractions.
//!
//! Continuous routines are generic over [`Real`] (`f32` or `f64`). Special
//! functions are evaluated in `f64` and rounded to the target type, so an
//! `f32` instantiation is never more accurate than its own epsilon allows.
//!
//! Finite-alphabet computations only need field operations and are generic
//! over [`Field`], which is also implemented by exact rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, NumCast, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + NumCast + Debug + Display + Default + Sum + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 literal representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("real scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field elements used for exact selection probabilities.
pub trait Field: Clone + Num + PartialOrd + ToPrimitive + Debug {}

impl<T> Field for T where T: Clone + Num + PartialOrd + ToPrimitive + Debug {}

/// Arbitrary precision rational.
pub type Rational = Ratio<BigInt>;

/// `base^exp` by repeated squaring using only field multiplication.
pub fn powi<T: Field>(base: &T, mut exp: u64) -> T {
    let mut acc = T::one();
    let mut b = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b.clone();
        }
        exp >>= 1;
        if exp > 0 {
            b = b.clone() * b;
        }
    }
    acc
}
