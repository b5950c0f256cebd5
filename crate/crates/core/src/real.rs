//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! Two backends implement [`Real`]: native `f64` and the software
//! [`DoubleDouble`](crate::double_double::DoubleDouble) type (about 32
//! significant digits). Constants are supplied as unevaluated `hi + lo`
//! pairs so both backends see them at their full working precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

pub(crate) const PI: (f64, f64) = (3.141592653589793, 1.2246467991473532e-16);
pub(crate) const LN_2: (f64, f64) = (0.6931471805599453, 2.3190468138462996e-17);
pub(crate) const EULER_GAMMA: (f64, f64) = (0.5772156649015329, -4.942915152430645e-18);
pub(crate) const PI_SQ_OVER_6: (f64, f64) = (1.6449340668482264, 3.040672350398476e-17);
pub(crate) const SQRT_PI: (f64, f64) = (1.772453850905516, -7.666586499825799e-17);

pub trait Real:
    Copy
    + Send
    + Sync
    + 'static
    + Debug
    + Display
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
{
    /// Short backend name used in diagnostics.
    const NAME: &'static str;

    fn from_f64(x: f64) -> Self;
    /// Builds the value `hi + lo`; backends narrower than the pair drop `lo`.
    fn from_parts(hi: f64, lo: f64) -> Self;
    fn to_f64(self) -> f64;

    /// Unit roundoff of the backend.
    fn epsilon() -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn exp_m1(self) -> Self;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn is_finite(self) -> bool;

    #[inline]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    #[inline]
    fn one() -> Self {
        Self::from_f64(1.0)
    }

    #[inline]
    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    /// `self^y` for `self > 0`; `0^y = 0` for `y > 0`.
    fn powf(self, y: Self) -> Self {
        if self == Self::zero() {
            return Self::zero();
        }
        (y * self.ln()).exp()
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn is_sign_negative(self) -> bool {
        self < Self::zero()
    }

    fn pi() -> Self {
        Self::from_parts(PI.0, PI.1)
    }

    fn ln_2() -> Self {
        Self::from_parts(LN_2.0, LN_2.1)
    }

    fn euler_gamma() -> Self {
        Self::from_parts(EULER_GAMMA.0, EULER_GAMMA.1)
    }

    fn sqrt_pi() -> Self {
        Self::from_parts(SQRT_PI.0, SQRT_PI.1)
    }
}

impl Real for f64 {
    const NAME: &'static str = "double";

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn from_parts(hi: f64, lo: f64) -> Self {
        hi + lo
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline]
    fn epsilon() -> Self {
        f64::EPSILON
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }

    #[inline]
    fn exp_m1(self) -> Self {
        f64::exp_m1(self)
    }

    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }

    #[inline]
    fn ln_1p(self) -> Self {
        f64::ln_1p(self)
    }

    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }

    #[inline]
    fn powf(self, y: Self) -> Self {
        f64::powf(self, y)
    }

    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

/// `ln(n!)` accumulated in the working scalar.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    let mut acc = T::zero();
    for j in 2..=n {
        acc += T::from_usize(j).ln();
    }
    acc
}

/// `(-1)^n` as a scalar.
#[inline]
pub fn alternating_sign<T: Real>(n: usize) -> T {
    if n % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}
