//! Exact rational numbers extended with a single positive infinity.
//!
//! Processing times in this crate are exact: dyadic lengths such as `2^-j`,
//! factorial ratios and hand-written integers all live in [`Rat`]. The value
//! [`Rat::INFINITY`] marks a machine that is outside a job's strategy set.
//! Operations that would need a value outside `Q ∪ {+∞}` (`∞ − ∞`, `∞ × 0`,
//! division by zero, anything negative-infinite) are errors.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RatError {
    #[error("undefined arithmetic: {0}")]
    Undefined(&'static str),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Finite(BigRational),
    Infinity,
}

/// An exact rational number, or `+∞`.
///
/// Finite values are always in lowest terms with a positive denominator
/// (guaranteed by `BigRational`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rat(Repr);

impl Rat {
    pub const INFINITY: Rat = Rat(Repr::Infinity);

    pub fn zero() -> Self {
        Rat(Repr::Finite(BigRational::zero()))
    }

    pub fn one() -> Self {
        Rat(Repr::Finite(BigRational::one()))
    }

    pub fn from_integer(n: i64) -> Self {
        Rat(Repr::Finite(BigRational::from_integer(BigInt::from(n))))
    }

    /// `numer / denom`, reduced. Panics if `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rat(Repr::Finite(BigRational::new(
            BigInt::from(numer),
            BigInt::from(denom),
        )))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Result<Self, RatError> {
        if denom.is_zero() {
            return Err(RatError::DivisionByZero);
        }
        Ok(Rat(Repr::Finite(BigRational::new(numer, denom))))
    }

    /// `2^exp` for any integer exponent.
    pub fn pow2(exp: i32) -> Self {
        let base = BigRational::from_integer(BigInt::from(2));
        Rat(Repr::Finite(num_traits::pow::Pow::pow(&base, exp)))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.0, Repr::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Finite(r) if r.is_zero())
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Finite(r) => r.is_positive(),
            Repr::Infinity => true,
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(&self.0, Repr::Finite(r) if r.is_negative())
    }

    pub fn as_ratio(&self) -> Option<&BigRational> {
        match &self.0 {
            Repr::Finite(r) => Some(r),
            Repr::Infinity => None,
        }
    }

    pub fn numer(&self) -> Option<&BigInt> {
        self.as_ratio().map(|r| r.numer())
    }

    pub fn denom(&self) -> Option<&BigInt> {
        self.as_ratio().map(|r| r.denom())
    }

    /// Decimal rendering rounded half away from zero to `places` digits,
    /// computed exactly (no floating point). Infinity renders as `inf`.
    pub fn to_decimal(&self, places: u32) -> String {
        let Repr::Finite(r) = &self.0 else {
            return "inf".into();
        };
        let scale = BigInt::from(10u32).pow(places);
        let twice_denom = r.denom() * 2;
        let mut scaled: BigInt = r.numer().abs() * &scale * 2 + r.denom();
        scaled /= &twice_denom;
        let digits = scaled.to_string();
        let places = places as usize;
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (int_part, frac) = padded.split_at(padded.len() - places);
        let sign = if r.is_negative() && !scaled.is_zero() {
            "-"
        } else {
            ""
        };
        if places == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        }
    }

    pub fn checked_add(&self, rhs: &Rat) -> Result<Rat, RatError> {
        match (&self.0, &rhs.0) {
            (Repr::Finite(a), Repr::Finite(b)) => Ok(Rat(Repr::Finite(a + b))),
            _ => Ok(Rat::INFINITY),
        }
    }

    pub fn checked_sub(&self, rhs: &Rat) -> Result<Rat, RatError> {
        match (&self.0, &rhs.0) {
            (Repr::Finite(a), Repr::Finite(b)) => Ok(Rat(Repr::Finite(a - b))),
            (Repr::Infinity, Repr::Finite(_)) => Ok(Rat::INFINITY),
            (Repr::Infinity, Repr::Infinity) => Err(RatError::Undefined("inf - inf")),
            (Repr::Finite(_), Repr::Infinity) => Err(RatError::Undefined("finite - inf")),
        }
    }

    pub fn checked_mul(&self, rhs: &Rat) -> Result<Rat, RatError> {
        match (&self.0, &rhs.0) {
            (Repr::Finite(a), Repr::Finite(b)) => Ok(Rat(Repr::Finite(a * b))),
            (Repr::Infinity, Repr::Infinity) => Ok(Rat::INFINITY),
            (Repr::Infinity, Repr::Finite(x)) | (Repr::Finite(x), Repr::Infinity) => {
                if x.is_zero() {
                    Err(RatError::Undefined("inf * 0"))
                } else if x.is_negative() {
                    Err(RatError::Undefined("inf * negative"))
                } else {
                    Ok(Rat::INFINITY)
                }
            }
        }
    }

    pub fn checked_div(&self, rhs: &Rat) -> Result<Rat, RatError> {
        match (&self.0, &rhs.0) {
            (_, Repr::Finite(b)) if b.is_zero() => Err(RatError::DivisionByZero),
            (Repr::Finite(a), Repr::Finite(b)) => Ok(Rat(Repr::Finite(a / b))),
            (Repr::Finite(_), Repr::Infinity) => Ok(Rat::zero()),
            (Repr::Infinity, Repr::Finite(b)) => {
                if b.is_negative() {
                    Err(RatError::Undefined("inf / negative"))
                } else {
                    Ok(Rat::INFINITY)
                }
            }
            (Repr::Infinity, Repr::Infinity) => Err(RatError::Undefined("inf / inf")),
        }
    }

    pub fn checked_neg(&self) -> Result<Rat, RatError> {
        match &self.0 {
            Repr::Finite(a) => Ok(Rat(Repr::Finite(-a))),
            Repr::Infinity => Err(RatError::Undefined("-inf")),
        }
    }

    pub fn square(&self) -> Rat {
        self * self
    }

    pub fn min_of<'a>(&'a self, other: &'a Rat) -> &'a Rat {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max_of<'a>(&'a self, other: &'a Rat) -> &'a Rat {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_integer(n)
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Self {
        Rat(Repr::Finite(r))
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => a.cmp(b),
            (Repr::Finite(_), Repr::Infinity) => Ordering::Less,
            (Repr::Infinity, Repr::Finite(_)) => Ordering::Greater,
            (Repr::Infinity, Repr::Infinity) => Ordering::Equal,
        }
    }
}

macro_rules! forward_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<'a> $trait<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}: {self} {} {rhs}", stringify!($method)),
                }
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                self.$method(&rhs)
            }
        }
    };
}

// The operator forms panic on undefined results; use the `checked_*` methods
// where infinity can reach the arithmetic.
forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);
forward_op!(Div, div, checked_div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        self.checked_neg().expect("negating infinity")
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        self.checked_neg().expect("negating infinity")
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Infinity => f.write_str("inf"),
            Repr::Finite(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            Repr::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = RatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Rat::INFINITY);
        }
        let parse_int =
            |x: &str| BigInt::from_str(x.trim()).map_err(|_| RatError::Parse(s.to_string()));
        match t.split_once('/') {
            None => Ok(Rat(Repr::Finite(BigRational::from_integer(parse_int(t)?)))),
            Some((n, d)) => {
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(RatError::Parse(s.to_string()));
                }
                Ok(Rat(Repr::Finite(BigRational::new(parse_int(n)?, d))))
            }
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Text(String),
            Int(i64),
        }
        match Wire::deserialize(deserializer)? {
            Wire::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Wire::Int(n) => Ok(Rat::from_integer(n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering_is_exact() {
        assert_eq!(Rat::new(5, 3).to_decimal(4), "1.6667");
        assert_eq!(Rat::new(-1, 8).to_decimal(2), "-0.13");
        assert_eq!(Rat::new(1, 3).to_decimal(0), "0");
        assert_eq!(Rat::new(-1, 1000).to_decimal(2), "0.00");
        assert_eq!(Rat::from_integer(300).to_decimal(3), "300.000");
        assert_eq!(Rat::INFINITY.to_decimal(3), "inf");
    }

    #[test]
    fn parses_and_prints_canonically() {
        assert_eq!("6/4".parse::<Rat>().unwrap().to_string(), "3/2");
        assert_eq!("-2/-4".parse::<Rat>().unwrap().to_string(), "1/2");
        assert_eq!("4/-2".parse::<Rat>().unwrap().to_string(), "-2");
        assert_eq!("inf".parse::<Rat>().unwrap(), Rat::INFINITY);
        assert!("1/0".parse::<Rat>().is_err());
        assert!("abc".parse::<Rat>().is_err());
    }

    #[test]
    fn infinity_ordering_and_addition() {
        let big = Rat::from_integer(1_000_000_000);
        assert!(Rat::INFINITY > big);
        assert_eq!(&Rat::INFINITY + &big, Rat::INFINITY);
        assert_eq!(Rat::INFINITY.checked_sub(&big).unwrap(), Rat::INFINITY);
    }

    #[test]
    fn undefined_infinity_arithmetic_is_an_error() {
        assert!(Rat::INFINITY.checked_mul(&Rat::zero()).is_err());
        assert!(Rat::INFINITY.checked_sub(&Rat::INFINITY).is_err());
        assert!(Rat::one().checked_div(&Rat::zero()).is_err());
        assert!(Rat::INFINITY.checked_neg().is_err());
    }

    #[test]
    #[should_panic]
    fn operator_form_panics_on_inf_minus_inf() {
        let _ = Rat::INFINITY - Rat::INFINITY;
    }

    #[test]
    fn powers_of_two() {
        assert_eq!(Rat::pow2(-3), Rat::new(1, 8));
        assert_eq!(Rat::pow2(4), Rat::from_integer(16));
        assert_eq!(Rat::pow2(0), Rat::one());
    }

    #[test]
    fn serde_accepts_strings_and_integers() {
        let v: Vec<Rat> = serde_json::from_str(r#"["1/2", 3, "inf"]"#).unwrap();
        assert_eq!(v, vec![Rat::new(1, 2), Rat::from_integer(3), Rat::INFINITY]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["1/2","3","inf"]"#);
    }
}
