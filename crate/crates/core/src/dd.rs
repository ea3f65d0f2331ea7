//! Double-double arithmetic and compensated summation.
//!
//! Kernel tables are built in double-double precision because their mean
//! values are many orders of magnitude below the individual entries, and a
//! plain `f64` table cannot resolve them.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Nearest double-double to an integer; exact for `|x| < 2^106`.
    pub fn from_i128(x: i128) -> Self {
        let hi = x as f64;
        // |x - hi| <= 2^74 fits i128 comfortably
        let rest = x - hi as i128;
        let (hi, lo) = quick_two_sum(hi, rest as f64);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn powi(self, mut n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut base = self;
        let mut acc = Self::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let y = self.hi.sqrt();
        let (p, e) = two_prod(y, y);
        let r = (self.hi - p - e + self.lo) / (2.0 * y);
        let (hi, lo) = quick_two_sum(y, r);
        Self { hi, lo }
    }

    /// `(cos t, sin t)` by Taylor series; intended for `|t| <= 2π`.
    pub fn cos_sin(t: Self) -> (Self, Self) {
        // halve the argument until small, then double back with the
        // angle-addition identities
        let mut halvings = 0;
        let mut x = t;
        while x.hi.abs() > 0.125 {
            x = x * 0.5;
            halvings += 1;
        }
        let x2 = x * x;
        let mut term = Self::ONE;
        let mut c = Self::ONE;
        let mut k = 0.0;
        loop {
            term = -(term * x2) / ((k + 1.0) * (k + 2.0));
            k += 2.0;
            c += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        let mut term = x;
        let mut s = x;
        let mut k = 1.0;
        loop {
            term = -(term * x2) / ((k + 1.0) * (k + 2.0));
            k += 2.0;
            s += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..halvings {
            let s2 = s * c * 2.0;
            let c2 = c * c - s * s;
            s = s2;
            c = c2;
        }
        (c, s)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Add<f64> for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        let (s, e) = two_sum(self.hi, rhs);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Sub<f64> for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        let (p, e) = two_prod(self.hi, rhs);
        let (hi, lo) = quick_two_sum(p, e + self.lo * rhs);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + q3
    }
}

impl Div<f64> for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self / Self::from_f64(rhs)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl AddAssign<f64> for DoubleDouble {
    fn add_assign(&mut self, rhs: f64) {
        *self = *self + rhs;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}

/// Compensated sum of `f64` terms, rounded once at the end.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms
        .into_iter()
        .fold(DoubleDouble::ZERO, |acc, x| acc + x)
        .to_f64()
}

/// `x = mant · 2^exp` with `exp >= -1074`.
fn decode(x: f64) -> (i64, i32) {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (mant, exp) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | 1 << 52, biased - 1075)
    };
    (if x.is_sign_negative() { -mant } else { mant }, exp)
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 500 {
        x *= 2f64.powi(500);
        e -= 500;
    }
    while e < -500 {
        x *= 2f64.powi(-500);
        e += 500;
    }
    x * 2f64.powi(e as i32)
}

/// Nearby `f64` of `acc · 2^-1074`.
fn fixed_to_f64(acc: &BigInt) -> f64 {
    let shift = acc.bits().saturating_sub(100);
    let top = (acc >> shift).to_f64().unwrap_or(0.0);
    ldexp(top, shift as i64 - 1074)
}

fn f64_to_fixed(x: f64) -> BigInt {
    let (mant, exp) = decode(x);
    BigInt::from(mant) << (exp + 1074) as usize
}

/// Exact sum of finite `f64` terms in a fixed-point big integer, rounded to
/// double-double at the end. Used where the result is many orders of
/// magnitude below the partial sums.
pub fn exact_sum<I: IntoIterator<Item = f64>>(terms: I) -> DoubleDouble {
    let mut acc = BigInt::zero();
    for x in terms {
        debug_assert!(x.is_finite());
        if x != 0.0 {
            acc += f64_to_fixed(x);
        }
    }
    let hi = fixed_to_f64(&acc);
    let rest = acc - f64_to_fixed(hi);
    let lo = fixed_to_f64(&rest);
    let (hi, lo) = quick_two_sum(hi, lo);
    DoubleDouble { hi, lo }
}

/// Minimal complex number over double-doubles, enough for a b-ary DFT.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexDd {
    pub re: DoubleDouble,
    pub im: DoubleDouble,
}

impl ComplexDd {
    pub const ZERO: Self = Self {
        re: DoubleDouble::ZERO,
        im: DoubleDouble::ZERO,
    };

    pub fn new(re: DoubleDouble, im: DoubleDouble) -> Self {
        Self { re, im }
    }

    /// `exp(2πi k / n)`.
    pub fn root_of_unity(k: u64, n: u64) -> Self {
        let k = k % n;
        if k == 0 {
            return Self::new(DoubleDouble::ONE, DoubleDouble::ZERO);
        }
        if 2 * k == n {
            return Self::new(-DoubleDouble::ONE, DoubleDouble::ZERO);
        }
        let theta = DoubleDouble::PI * 2.0 * (k as f64) / (n as f64);
        let (c, s) = DoubleDouble::cos_sin(theta);
        Self::new(c, s)
    }
}

impl Add for ComplexDd {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Mul for ComplexDd {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}
