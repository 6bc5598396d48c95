//! The scalar abstraction shared by the generic modules.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating-point scalar accepted by the generic parts of the crate.
///
/// Implemented for `f32` and `f64`. Anything meeting the bounds works.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Multiplies `x` by `2^e` using exact power-of-two steps.
///
/// Every intermediate product is exact as long as it stays in the normal
/// range, so the result is correctly rounded unless it lands in the
/// subnormal range.
pub fn ldexp<T: Real>(x: T, e: i64) -> T {
    const STEP: i64 = 60;
    let two_step = T::lit((1u64 << STEP) as f64);
    let mut x = x;
    let mut e = e;
    while e > STEP {
        if x.is_zero() || x.is_infinite() {
            return x;
        }
        x = x * two_step;
        e -= STEP;
    }
    while e < -STEP {
        if x.is_zero() || x.is_infinite() {
            return x;
        }
        x = x / two_step;
        e += STEP;
    }
    let last = T::lit((1u64 << e.unsigned_abs()) as f64);
    if e >= 0 {
        x * last
    } else {
        x / last
    }
}

/// `2^e` as a scalar (zero or infinity outside the representable range).
pub fn exp2i<T: Real>(e: i64) -> T {
    ldexp(T::one(), e)
}

/// Sum with pairwise (cascade) reduction, which keeps rounding error at
/// `O(log n)` ulps.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
