//! Numeric abstraction over the two computation tracks: exact rationals
//! for incidence-algebra identities, `f64` for simulation and the
//! feasibility solver.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// Arbitrary-precision rational, the exact track.
pub type Rational = Ratio<BigInt>;

/// Scalar type usable on either numeric track.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// True for the exact-rational track; identity checks then require
    /// zero error and tolerances are ignored.
    const EXACT: bool;

    /// Magnitudes at or below this count as zero when pivoting; exactly
    /// zero on the rational track.
    fn pivot_tol() -> Self;

    fn from_u64(n: u64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_u64(n as u64)
    }

    /// Integer power with non-negative exponent.
    fn powu(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn pivot_tol() -> Self {
        Rational::from_integer(0.into())
    }

    fn from_u64(n: u64) -> Self {
        Ratio::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn pivot_tol() -> Self {
        1e-11
    }

    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

/// Binomial coefficient C(n, k) as an exact rational.
pub fn binomial(n: u64, k: u64) -> Rational {
    if k > n {
        return Rational::zero();
    }
    let mut acc = BigInt::one();
    let k = k.min(n - k);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Ratio::from_integer(acc)
}

/// Parse a rational from "p/q" or a plain integer string.
pub fn parse_rational(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).ok()?;
            let q = BigInt::from_str(q.trim()).ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Ratio::new(p, q))
            }
        }
        None => BigInt::from_str(s.trim()).ok().map(Ratio::from_integer),
    }
}

/// Format a rational as "p/q" (or "p" when integral).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact rational for a decimal literal like "0.35" or "1/3".
pub fn rational_from_decimal_str(s: &str) -> Option<Rational> {
    if s.contains('/') {
        return parse_rational(s);
    }
    let s = s.trim();
    match s.split_once('.') {
        None => parse_rational(s),
        Some((int, frac)) => {
            let digits: String = format!("{int}{frac}");
            let p = BigInt::from_str(&digits).ok()?;
            let q = BigInt::from(10u32).pow(frac.len() as u32);
            Some(Ratio::new(p, q))
        }
    }
}
