//! Numeric scalars: exact rationals or tolerance-compared binary floats.

use std::cmp::Ordering;
use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always gcd-reduced with a positive denominator.
pub type Rational = BigRational;

/// Numeric mode selected per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumericMode {
    #[default]
    Rational,
    Float,
}

/// Real-valued quantity used throughout the solver.
///
/// Every comparison goes through [`Scalar::cmp_tol`], which is exact for
/// rationals and uses the configured absolute tolerance for floats.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn cmp_tol(&self, other: &Self) -> Ordering;
    /// Exact total order, for sorting.
    fn total_cmp(&self, other: &Self) -> Ordering;
    /// Smallest integer not below `self`, if it fits.
    fn ceil_u64(&self) -> Option<u64>;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self.cmp_tol(other) == Ordering::Equal
    }
    fn is_zero(&self) -> bool {
        self.cmp_tol(&Self::zero()) == Ordering::Equal
    }
    fn is_positive(&self) -> bool {
        self.cmp_tol(&Self::zero()) == Ordering::Greater
    }
    fn is_negative(&self) -> bool {
        self.cmp_tol(&Self::zero()) == Ordering::Less
    }
    fn lt(&self, other: &Self) -> bool {
        self.cmp_tol(other) == Ordering::Less
    }
    fn le(&self, other: &Self) -> bool {
        self.cmp_tol(other) != Ordering::Greater
    }
    fn gt(&self, other: &Self) -> bool {
        self.cmp_tol(other) == Ordering::Greater
    }
    fn ge(&self, other: &Self) -> bool {
        self.cmp_tol(other) != Ordering::Less
    }
    fn min_of(a: &Self, b: &Self) -> Self {
        if b.lt(a) {
            b.clone()
        } else {
            a.clone()
        }
    }
    fn max_of(a: &Self, b: &Self) -> Self {
        if b.gt(a) {
            b.clone()
        } else {
            a.clone()
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn cmp_tol(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn ceil_u64(&self) -> Option<u64> {
        self.ceil().to_integer().to_u64()
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

static FLOAT_TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Absolute tolerance used by every float comparison.
pub fn float_tolerance() -> f64 {
    f64::from_bits(FLOAT_TOLERANCE_BITS.load(AtomicOrdering::Relaxed))
}

/// Sets the process-wide float tolerance.
pub fn set_float_tolerance(tol: f64) {
    assert!(tol >= 0.0 && tol.is_finite(), "tolerance must be finite and non-negative");
    FLOAT_TOLERANCE_BITS.store(tol.to_bits(), AtomicOrdering::Relaxed);
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        <Rational as Scalar>::to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn cmp_tol(&self, other: &Self) -> Ordering {
        if (self - other).abs() <= float_tolerance() {
            Ordering::Equal
        } else if self < other {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
    fn ceil_u64(&self) -> Option<u64> {
        // Snap values within tolerance of an integer before rounding up.
        let rounded = self.round();
        let v = if (self - rounded).abs() <= float_tolerance() {
            rounded
        } else {
            self.ceil()
        };
        (v >= 0.0 && v <= u64::MAX as f64).then_some(v as u64)
    }
}

/// Parses `"p/q"`, `"p"`, or a decimal literal such as `"-1.25e3"` into an
/// exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim())
            .map_err(|_| Error::Parse(format!("bad rational numerator in `{text}`")))?;
        let den = BigInt::from_str(den.trim())
            .map_err(|_| Error::Parse(format!("bad rational denominator in `{text}`")))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{text}`")));
        }
        return Ok(BigRational::new(num, den));
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("`{text}` is not a number"));
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all_digits).map_err(|_| bad())?);
    let shift = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if negative { -value } else { value })
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Display adapter for any scalar.
pub struct Show<'a, S>(pub &'a S);

impl<S: Scalar> fmt::Display for Show<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let any: &dyn std::any::Any = self.0;
        match any.downcast_ref::<Rational>() {
            Some(r) => f.write_str(&format_rational(r)),
            None => write!(f, "{}", self.0.to_f64()),
        }
    }
}

/// Least common multiple of the denominators, handy for scaling to integers.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn rationals_are_reduced() {
        let r = parse_rational("6/-4").unwrap();
        assert_eq!(r, q(-3, 2));
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(format_rational(&q(8, 4)), "2");
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("-2.50").unwrap(), q(-5, 2));
        assert_eq!(parse_rational("1.5e2").unwrap(), q(150, 1));
        assert_eq!(parse_rational("25e-2").unwrap(), q(1, 4));
        assert_eq!(parse_rational("7").unwrap(), q(7, 1));
    }

    #[test]
    fn malformed_numbers_rejected() {
        for bad in ["", "1/0", "abc", "1.2.3", "--1", "e5"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn float_comparisons_use_tolerance() {
        assert!(1.0f64.approx_eq(&(1.0 + 1e-12)));
        assert!(!1.0f64.approx_eq(&(1.0 + 1e-6)));
        assert_eq!((3.0000000000001f64).ceil_u64(), Some(3));
        assert_eq!((3.2f64).ceil_u64(), Some(4));
    }

    #[test]
    fn rational_ceil() {
        assert_eq!(q(17, 2).ceil_u64(), Some(9));
        assert_eq!(q(9, 1).ceil_u64(), Some(9));
    }
}
