//! Double-double arithmetic: a value is the unevaluated sum `hi + lo` of two
//! `f64` with `|lo| <= ulp(hi) / 2`, giving 106 bits of significand.
//!
//! The error-free transformations rely on `f64::mul_add` being a fused
//! multiply-add. The exponent range is that of `f64`; callers keep magnitudes
//! bounded (see the normalized derivative tables in `derivatives`).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::real::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

/// 2^e for any integer exponent reachable by an f64 result.
fn pow2(e: i64) -> f64 {
    f64::from_bits(((e + 1023) as u64) << 52)
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    /// Exact value `hi + lo` after renormalization.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Self::finish(h, l)
    }

    #[inline]
    fn finish(hi: f64, lo: f64) -> Self {
        if hi.is_finite() {
            Self { hi, lo }
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Self {
        let (p, mut e) = two_prod(self.hi, b);
        e += self.lo * b;
        let (h, l) = quick_two_sum(p, e);
        Self::finish(h, l)
    }

    #[inline]
    fn add_f64(self, b: f64) -> Self {
        let (s1, mut s2) = two_sum(self.hi, b);
        s2 += self.lo;
        let (h, l) = quick_two_sum(s1, s2);
        Self::finish(h, l)
    }

    #[inline]
    fn square(self) -> Self {
        let (p, mut e) = two_prod(self.hi, self.hi);
        e += 2.0 * self.hi * self.lo;
        let (h, l) = quick_two_sum(p, e);
        Self::finish(h, l)
    }

    /// Multiplies by 2^e without rounding (barring over/underflow).
    fn ldexp(self, e: i64) -> Self {
        // Split so that neither factor leaves the normal range.
        let (e1, e2) = (e / 2, e - e / 2);
        let (f1, f2) = (pow2(e1), pow2(e2));
        Self::finish(self.hi * f1 * f2, self.lo * f1 * f2)
    }

    fn inverse_factorials() -> &'static [DoubleDouble] {
        static TABLE: std::sync::OnceLock<Vec<DoubleDouble>> = std::sync::OnceLock::new();
        TABLE.get_or_init(|| {
            let mut out = Vec::with_capacity(40);
            let mut fact = DoubleDouble::ONE;
            out.push(DoubleDouble::ONE);
            for n in 1..40 {
                fact = fact.mul_f64(n as f64);
                out.push(DoubleDouble::ONE / fact);
            }
            out
        })
    }

    fn exp_impl(self) -> Self {
        if self.hi.is_nan() {
            return self;
        }
        if self.hi > 709.78 {
            return Self::new(f64::INFINITY, 0.0);
        }
        if self.hi < -745.1 {
            return Self::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Self::ONE;
        }
        let ln2 = Self::new(crate::real::LN_2.0, crate::real::LN_2.1);
        let m = (self.hi / ln2.hi + 0.5).floor();
        let r = (self - ln2.mul_f64(m)).ldexp(-9);
        let inv_fact = Self::inverse_factorials();

        // expm1(r) for |r| < 7e-4.
        let mut s = r;
        let mut power = r;
        let threshold = 1e-34 * r.hi.abs().max(f64::MIN_POSITIVE);
        for coeff in inv_fact.iter().skip(2) {
            power = power * r;
            let term = power * *coeff;
            s += term;
            if term.hi.abs() <= threshold {
                break;
            }
        }
        for _ in 0..9 {
            s = s.mul_f64(2.0) + s.square();
        }
        (s + Self::ONE).ldexp(m as i64)
    }

    fn ln_impl(self) -> Self {
        if self.hi < 0.0 || self.hi.is_nan() {
            return Self::new(f64::NAN, 0.0);
        }
        if self.hi == 0.0 {
            return Self::new(f64::NEG_INFINITY, 0.0);
        }
        if self.hi.is_infinite() {
            return self;
        }
        // Pull out a power of two so exp(-y) stays well inside the normal
        // range, then one Newton step on exp(y) = x doubles the f64 accuracy.
        let e = self.hi.log2().round() as i64;
        let x = self.ldexp(-e);
        let y = Self::from(x.hi.ln());
        let ln2 = Self::new(crate::real::LN_2.0, crate::real::LN_2.1);
        y + x * (-y).exp_impl() - Self::ONE + ln2.mul_f64(e as f64)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl Add for DoubleDouble {
    type Output = Self;

    #[inline]
    fn add(self, b: Self) -> Self {
        let (s1, mut s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        s2 += t1;
        let (s1, mut s2) = quick_two_sum(s1, s2);
        s2 += t2;
        let (h, l) = quick_two_sum(s1, s2);
        Self::finish(h, l)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;

    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;

    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, mut e) = two_prod(self.hi, b.hi);
        e += self.hi * b.lo + self.lo * b.hi;
        let (h, l) = quick_two_sum(p, e);
        Self::finish(h, l)
    }
}

impl Div for DoubleDouble {
    type Output = Self;

    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Self::new(q1, 0.0);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Self::finish(h, l).add_f64(q3)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;

    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl AddAssign for DoubleDouble {
    #[inline]
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for DoubleDouble {
    #[inline]
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl MulAssign for DoubleDouble {
    #[inline]
    fn mul_assign(&mut self, b: Self) {
        *self = *self * b;
    }
}

impl DivAssign for DoubleDouble {
    #[inline]
    fn div_assign(&mut self, b: Self) {
        *self = *self / b;
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for DoubleDouble {
    /// Scientific notation with 32 significant digits (or the requested
    /// precision).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.hi.is_finite() || self.hi == 0.0 {
            return write!(f, "{:e}", self.hi);
        }
        let digits = f.precision().map(|p| p + 1).unwrap_or(32).clamp(1, 33);
        let negative = self.hi < 0.0;
        let mut v = self.abs();
        let mut exponent = v.hi.log10().floor() as i32;
        v = v / DoubleDouble::from(10.0).powi(exponent);
        if v.hi >= 10.0 {
            v = v / DoubleDouble::from(10.0);
            exponent += 1;
        } else if v.hi < 1.0 {
            v = v * DoubleDouble::from(10.0);
            exponent -= 1;
        }
        let mut out = String::with_capacity(digits + 8);
        if negative {
            out.push('-');
        }
        for i in 0..digits {
            let d = v.hi.floor().clamp(0.0, 9.0);
            out.push(char::from(b'0' + d as u8));
            if i == 0 && digits > 1 {
                out.push('.');
            }
            v = (v - DoubleDouble::from(d)).mul_f64(10.0);
        }
        write!(f, "{out}e{exponent}")
    }
}

impl Real for DoubleDouble {
    const NAME: &'static str = "extended";

    #[inline]
    fn from_f64(x: f64) -> Self {
        Self::from(x)
    }

    #[inline]
    fn from_parts(hi: f64, lo: f64) -> Self {
        Self::new(hi, lo)
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn epsilon() -> Self {
        // 2^-104
        Self::from(4.930380657631324e-32)
    }

    #[inline]
    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::ZERO } else { Self::new(f64::NAN, 0.0) };
        }
        if self.hi.is_infinite() {
            return self;
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (p, e) = two_prod(ax, ax);
        let residual = self - Self::new(p, e);
        Self::from(ax).add_f64(residual.hi * x * 0.5)
    }

    fn exp(self) -> Self {
        self.exp_impl()
    }

    fn exp_m1(self) -> Self {
        if self.hi.abs() >= 0.5 {
            return self.exp_impl() - Self::ONE;
        }
        let inv_fact = Self::inverse_factorials();
        let mut sum = self;
        let mut power = self;
        for coeff in inv_fact.iter().skip(2) {
            power = power * self;
            let term = power * *coeff;
            sum += term;
            if term.hi.abs() <= 1e-34 * sum.hi.abs() {
                break;
            }
        }
        sum
    }

    fn ln(self) -> Self {
        self.ln_impl()
    }

    fn ln_1p(self) -> Self {
        if self.hi.abs() >= 0.5 {
            return (Self::ONE + self).ln_impl();
        }
        // ln(1+x) = 2 atanh(x / (2 + x))
        let s = self / (Self::from(2.0) + self);
        let s2 = s * s;
        let mut power = s;
        let mut sum = s;
        let mut k = 1.0;
        loop {
            power = power * s2;
            k += 2.0;
            let term = power / Self::from(k);
            sum += term;
            if term.hi.abs() <= 1e-34 * sum.hi.abs() || k > 400.0 {
                break;
            }
        }
        sum.mul_f64(2.0)
    }

    fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.square();
            e >>= 1;
        }
        if n < 0 {
            Self::ONE / acc
        } else {
            acc
        }
    }

    #[inline]
    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
}
