//! Scalar abstractions.
//!
//! Real-valued numerics (densities, quadrature, predictors) are written against
//! [`Real`], implemented for `f32` and `f64`. Quantities that are polynomials in
//! the inclusion probability (means, Stein-Chen sums, exhaustive moments) are
//! written against [`Field`], which additionally admits exact rationals.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Floating point scalar used by the analytic parts of the crate.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    /// Absolute tolerance the adaptive quadrature aims for by default.
    fn default_tolerance() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn from_int(n: u64) -> Self {
        Self::from_u64(n).expect("integer representable")
    }
}

impl Real for f32 {
    fn default_tolerance() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn default_tolerance() -> Self {
        1e-9
    }
}

/// Scalar closed under the field operations: `f64`, `f32` or `BigRational`.
pub trait Field: Clone + Num + PartialOrd + ToPrimitive + Debug {
    fn from_count(n: u64) -> Self {
        let mut acc = Self::zero();
        let mut base = Self::one();
        let mut n = n;
        // binary expansion keeps this exact for rationals and cheap for floats
        while n > 0 {
            if n & 1 == 1 {
                acc = acc + base.clone();
            }
            base = base.clone() + base;
            n >>= 1;
        }
        acc
    }

    fn ipow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }
}

impl<T: Clone + Num + PartialOrd + ToPrimitive + Debug> Field for T {}

/// Neumaier-compensated sum of a sequence.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(terms: I) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry = carry + ((sum - t) + x);
        } else {
            carry = carry + ((x - t) + sum);
        }
        sum = t;
    }
    sum + carry
}
