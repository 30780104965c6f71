//! Exact rational numbers backed by `Ratio<i128>`.
//!
//! Every operation is checked. Overflow of the 128-bit numerator or
//! denominator is a programming error at the scales this crate works with
//! (grids of a few dozen points, at most ten agents) and panics with a
//! message rather than wrapping.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i128>);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Builds `numer / denom` in lowest terms. Panics on a zero denominator.
    pub fn new(numer: i128, denom: i128) -> Self {
        assert!(denom != 0, "rational with zero denominator");
        Rational(Ratio::new(numer, denom))
    }

    pub fn from_integer(value: i128) -> Self {
        Rational(Ratio::from_integer(value))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    /// Always positive.
    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// `|self - other|`
    pub fn abs_diff(&self, other: &Rational) -> Self {
        (*self - *other).abs()
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    pub fn min(self, other: Rational) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Rational) -> Self {
        std::cmp::max(self, other)
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Rational::ONE;
        for _ in 0..exp {
            acc = acc * *self;
        }
        acc
    }

    /// Midpoint of two values.
    pub fn midpoint(&self, other: &Rational) -> Self {
        (*self + *other) / Rational::from_integer(2)
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn checked_add(&self, rhs: &Rational) -> Option<Rational> {
        self.0.checked_add(&rhs.0).map(Rational)
    }

    pub fn checked_sub(&self, rhs: &Rational) -> Option<Rational> {
        self.0.checked_sub(&rhs.0).map(Rational)
    }

    pub fn checked_mul(&self, rhs: &Rational) -> Option<Rational> {
        self.0.checked_mul(&rhs.0).map(Rational)
    }

    pub fn checked_div(&self, rhs: &Rational) -> Option<Rational> {
        self.0.checked_div(&rhs.0).map(Rational)
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value as i128)
    }
}

impl From<i32> for Rational {
    fn from(value: i32) -> Self {
        Rational::from_integer(value as i128)
    }
}

impl From<usize> for Rational {
    fn from(value: usize) -> Self {
        Rational::from_integer(value as i128)
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational::ZERO
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational::ONE
    }
}

macro_rules! checked_binop {
    ($trait:ident, $method:ident, $checked:ident, $assign_trait:ident, $assign:ident, $what:literal) => {
        impl $trait for Rational {
            type Output = Rational;

            fn $method(self, rhs: Rational) -> Rational {
                self.$checked(&rhs)
                    .unwrap_or_else(|| panic!(concat!("rational ", $what, " overflow: {} and {}"), self, rhs))
            }
        }

        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;

            fn $method(self, rhs: &'a Rational) -> Rational {
                self.$method(*rhs)
            }
        }

        impl $assign_trait for Rational {
            fn $assign(&mut self, rhs: Rational) {
                *self = self.$method(rhs);
            }
        }
    };
}

checked_binop!(Add, add, checked_add, AddAssign, add_assign, "addition");
checked_binop!(Sub, sub, checked_sub, SubAssign, sub_assign, "subtraction");

impl Mul for Rational {
    type Output = Rational;

    fn mul(self, rhs: Rational) -> Rational {
        self.checked_mul(&rhs)
            .unwrap_or_else(|| panic!("rational multiplication overflow: {} and {}", self, rhs))
    }
}

impl<'a> Mul<&'a Rational> for Rational {
    type Output = Rational;

    fn mul(self, rhs: &'a Rational) -> Rational {
        self * *rhs
    }
}

impl Div for Rational {
    type Output = Rational;

    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        self.checked_div(&rhs)
            .unwrap_or_else(|| panic!("rational division overflow: {} and {}", self, rhs))
    }
}

impl<'a> Div<&'a Rational> for Rational {
    type Output = Rational;

    fn div(self, rhs: &'a Rational) -> Rational {
        self / *rhs
    }
}

impl Neg for Rational {
    type Output = Rational;

    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + *x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"p/q"` and plain integers, with optional sign and surrounding
    /// whitespace.
    fn from_str(s: &str) -> Result<Self, Error> {
        let fail = |reason: &str| Error::ParseRational {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(fail("empty string"));
        }
        let (numer, denom) = match trimmed.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (trimmed, "1"),
        };
        let numer: i128 = numer.parse().map_err(|_| fail("numerator is not an integer"))?;
        let denom: i128 = denom.parse().map_err(|_| fail("denominator is not an integer"))?;
        if denom == 0 {
            return Err(fail("zero denominator"));
        }
        Ok(Rational::new(numer, denom))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand used throughout the tests and examples: `q(1, 3)` is one third.
pub fn q(numer: i128, denom: i128) -> Rational {
    Rational::new(numer, denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!("1/3".parse::<Rational>().unwrap(), q(1, 3));
        assert_eq!(" -2/4 ".parse::<Rational>().unwrap(), q(-1, 2));
        assert_eq!("7".parse::<Rational>().unwrap(), Rational::from_integer(7));
        assert_eq!("3/-6".parse::<Rational>().unwrap(), q(-1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!("".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!("0.5".parse::<Rational>().is_err());
        assert!("a/b".parse::<Rational>().is_err());
    }

    #[test]
    fn lowest_terms_positive_denominator() {
        let r = q(6, -8);
        assert_eq!((r.numer(), r.denom()), (-3, 4));
        assert_eq!(r.to_string(), "-3/4");
        assert_eq!(q(4, 2).to_string(), "2");
    }

    #[test]
    fn serde_uses_strings() {
        let json = serde_json::to_string(&vec![q(2, 3), Rational::ZERO]).unwrap();
        assert_eq!(json, r#"["2/3","0"]"#);
        let back: Vec<Rational> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![q(2, 3), Rational::ZERO]);
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn overflow_panics() {
        let big = Rational::from_integer(i128::MAX / 2);
        let _ = big * big;
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-200i128..200, 1i128..60).prop_map(|(p, q)| Rational::new(p, q))
    }

    proptest! {
        #[test]
        fn field_laws(a in small(), b in small(), c in small()) {
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a - a, Rational::ZERO);
            if !b.is_zero() {
                prop_assert_eq!((a / b) * b, a);
            }
        }

        #[test]
        fn display_round_trips(a in small()) {
            prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
            prop_assert!(a.denom() > 0);
        }

        #[test]
        fn abs_diff_symmetric(a in small(), b in small()) {
            prop_assert_eq!(a.abs_diff(&b), b.abs_diff(&a));
            prop_assert!(!a.abs_diff(&b).is_negative());
        }
    }
}
