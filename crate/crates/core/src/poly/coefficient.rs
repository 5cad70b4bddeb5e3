use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};

/// Exact rational coefficient.
pub type Rational = BigRational;

/// Which arithmetic a polynomial's coefficients live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientMode {
    Exact,
    Float,
}

/// Coefficient field for [`super::Multinomial`].
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + 'static
{
    const MODE: CoefficientMode;

    fn from_u64(v: u64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_negative(&self) -> bool;
    fn abs(&self) -> Self;
    /// Parses an unsigned literal: integer, decimal, exponent form or `p/q`.
    fn parse_literal(s: &str) -> Option<Self>;
    /// Formats the absolute value; callers handle the sign.
    fn format_abs(&self) -> String;
}

impl Coefficient for f64 {
    const MODE: CoefficientMode = CoefficientMode::Float;

    fn from_u64(v: u64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn parse_literal(s: &str) -> Option<Self> {
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.parse().ok()?;
            let q: f64 = q.parse().ok()?;
            return (q != 0.0).then(|| p / q);
        }
        s.parse().ok().filter(|v: &f64| v.is_finite())
    }
    fn format_abs(&self) -> String {
        super::format_f64(f64::abs(*self))
    }
}

impl Coefficient for Rational {
    const MODE: CoefficientMode = CoefficientMode::Exact;

    fn from_u64(v: u64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn parse_literal(s: &str) -> Option<Self> {
        if let Some((p, q)) = s.split_once('/') {
            let p = parse_decimal(p)?;
            let q = parse_decimal(q)?;
            return (!q.is_zero()).then(|| p / q);
        }
        parse_decimal(s)
    }
    fn format_abs(&self) -> String {
        let a = Signed::abs(self);
        if a.is_integer() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
}

/// Exact value of an unsigned decimal literal such as `12`, `0.25` or `1.5e-3`.
fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Exact rational with value `p/q`.
pub fn rational(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_decimal("0.25"), Some(rational(1, 4)));
        assert_eq!(parse_decimal("12"), Some(rational(12, 1)));
        assert_eq!(parse_decimal("1.5e-3"), Some(rational(3, 2000)));
        assert_eq!(parse_decimal("2e2"), Some(rational(200, 1)));
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("1x"), None);
    }

    #[test]
    fn rational_fraction_literal() {
        assert_eq!(Rational::parse_literal("3/2"), Some(rational(3, 2)));
        assert_eq!(Rational::parse_literal("3/0"), None);
        assert_eq!(rational(-3, 2).format_abs(), "3/2");
    }
}
