//! Exact rational scalar.
//!
//! `Rat` wraps an arbitrary-precision rational that is always kept in lowest
//! terms with a positive denominator. Every payoff, probability and LP entry in
//! the crate is a `Rat`.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseRatError;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Option<Self> {
        if den.is_zero() {
            None
        } else {
            Some(Rat(BigRational::new(num, den)))
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Option<Rat> {
        if self.is_zero() {
            None
        } else {
            Some(Rat(self.0.recip()))
        }
    }

    pub fn checked_div(&self, rhs: &Rat) -> Option<Rat> {
        if rhs.is_zero() {
            None
        } else {
            Some(Rat(&self.0 / &rhs.0))
        }
    }

    pub fn floor(&self) -> Rat {
        Rat(self.0.floor())
    }

    pub fn ceil(&self) -> Rat {
        Rat(self.0.ceil())
    }

    /// Integer part of `floor(self)`.
    pub fn floor_int(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn pow(&self, exp: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn max(self, other: Rat) -> Rat {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Rat) -> Rat {
        if other < self {
            other
        } else {
            self
        }
    }

    /// If `self == 1/m` for a positive integer `m`, returns `m`.
    pub fn inverse_integer(&self) -> Option<u64> {
        if self.is_positive() && self.numer().is_one() {
            self.denom().to_u64()
        } else {
            None
        }
    }

    /// Largest `1/m <= self` with `m` a positive integer. `self` must be positive.
    pub fn round_down_to_inverse_integer(&self) -> Option<u64> {
        if !self.is_positive() {
            return None;
        }
        // m = ceil(1/self)
        let inv = self.0.recip();
        inv.ceil().to_integer().to_u64()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Canonical `p/q` text, denominators included even when they equal one.
    pub fn to_canonical(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn from_bigrational(r: BigRational) -> Self {
        Rat(r)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }
}

fn parse_digits(s: &str, text: &str) -> Result<BigInt, ParseRatError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRatError::new(text));
    }
    BigInt::from_str(s).map_err(|_| ParseRatError::new(text))
}

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts `p/q`, integers and decimal literals with an optional exponent.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let s = text.trim();
        if s.is_empty() || s.len() > 4096 {
            return Err(ParseRatError::new(text));
        }
        let (neg, body) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let value = if let Some((p, q)) = body.split_once('/') {
            let num = parse_digits(p, text)?;
            let den = parse_digits(q, text)?;
            Rat::from_big(num, den).ok_or_else(|| ParseRatError::new(text))?
        } else {
            let (mantissa, exp) = match body.find(['e', 'E']) {
                Some(pos) => {
                    let e = &body[pos + 1..];
                    let (eneg, edigits) = match e.as_bytes().first() {
                        Some(b'-') => (true, &e[1..]),
                        Some(b'+') => (false, &e[1..]),
                        _ => (false, e),
                    };
                    if edigits.is_empty()
                        || edigits.len() > 4
                        || !edigits.bytes().all(|b| b.is_ascii_digit())
                    {
                        return Err(ParseRatError::new(text));
                    }
                    let v: i64 = edigits.parse().map_err(|_| ParseRatError::new(text))?;
                    (&body[..pos], if eneg { -v } else { v })
                }
                None => (body, 0),
            };
            let (int_part, frac_part) = match mantissa.split_once('.') {
                Some((i, f)) => (i, f),
                None => (mantissa, ""),
            };
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(ParseRatError::new(text));
            }
            let digits = format!("{int_part}{frac_part}");
            let num = parse_digits(&digits, text)?;
            let scale = exp - frac_part.len() as i64;
            if scale.unsigned_abs() > 4096 {
                return Err(ParseRatError::new(text));
            }
            let ten = BigInt::from(10);
            let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
            if scale >= 0 {
                Rat::from(num * pow)
            } else {
                Rat::from_big(num, pow).ok_or_else(|| ParseRatError::new(text))?
            }
        };
        Ok(if neg { -value } else { value })
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_canonical())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        let text = match &value {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(serde::de::Error::custom(format!(
                    "expected rational string or number, found {other}"
                )))
            }
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(&self.0 $op &rhs.0)
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0 $op rhs.0)
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(self.0 $op &rhs.0)
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

// Division by zero panics, as with the primitive integer types. Use
// `checked_div` where the divisor is data-dependent.
binop!(Div, div, /);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        let mut acc = Rat::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |acc, x| acc * x)
    }
}

impl<'a> Product<&'a Rat> for Rat {
    fn product<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        let mut acc = Rat::one();
        for x in iter {
            acc *= x;
        }
        acc
    }
}

/// `k / m` as a `Rat`.
pub fn grid(k: u64, m: u64) -> Rat {
    Rat(BigRational::new(BigInt::from(k), BigInt::from(m)))
}

/// `floor(x * m)` for non-negative `x`, clamped into `u64`.
pub fn floor_mul(x: &Rat, m: u64) -> u64 {
    let scaled = &x.0 * BigRational::from_integer(BigInt::from(m));
    scaled.floor().to_integer().to_u64().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn parses_fraction_and_decimal_forms() {
        assert_eq!(r("2/4"), Rat::new(1, 2));
        assert_eq!(r("-3/6"), Rat::new(-1, 2));
        assert_eq!(r("0.25"), Rat::new(1, 4));
        assert_eq!(r("-1.5"), Rat::new(-3, 2));
        assert_eq!(r("7"), Rat::from_int(7));
        assert_eq!(r("2.5e-1"), Rat::new(1, 4));
        assert_eq!(r("1e2"), Rat::from_int(100));
        assert_eq!(r(".5"), Rat::new(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "a/b", "1//2", "--1", "1.2.3", "1e", "e5", ".", "1/-2", "0x10"] {
            assert!(bad.parse::<Rat>().is_err(), "{bad:?} parsed");
        }
    }

    #[test]
    fn canonical_form_always_has_denominator() {
        assert_eq!(Rat::from_int(3).to_canonical(), "3/1");
        assert_eq!(Rat::new(6, -4).to_canonical(), "-3/2");
        assert_eq!(Rat::new(6, -4).to_string(), "-3/2");
    }

    #[test]
    fn inverse_integer_helpers() {
        assert_eq!(Rat::new(1, 7).inverse_integer(), Some(7));
        assert_eq!(Rat::new(2, 7).inverse_integer(), None);
        assert_eq!(Rat::new(2, 7).round_down_to_inverse_integer(), Some(4));
        assert_eq!(Rat::new(1, 4).round_down_to_inverse_integer(), Some(4));
        assert_eq!(Rat::new(3, 10).round_down_to_inverse_integer(), Some(4));
    }

    #[test]
    fn checked_division() {
        assert!(Rat::one().checked_div(&Rat::zero()).is_none());
        assert_eq!(Rat::one().checked_div(&Rat::new(1, 3)), Some(Rat::from_int(3)));
    }

    #[test]
    fn json_accepts_numbers_and_strings() {
        let v: Vec<Rat> = serde_json::from_str(r#"["1/3", 0.5, 2, "-0.125"]"#).unwrap();
        assert_eq!(v, vec![Rat::new(1, 3), Rat::new(1, 2), Rat::from_int(2), Rat::new(-1, 8)]);
        assert_eq!(serde_json::to_string(&Rat::new(1, 2)).unwrap(), r#""1/2""#);
    }
}
