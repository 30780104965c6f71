//! Points of the (extended) real line and the two location domains.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Where agents may stand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `[0, 1]`; phantoms must be finite points of the interval.
    UnitInterval,
    /// `ℝ`; phantoms may additionally sit at `±∞`.
    RealLine,
}

impl Domain {
    /// The two extreme phantom positions: `0`/`1` on the interval, `∓∞` on the line.
    pub fn bottom(self) -> ExtLocation {
        match self {
            Domain::UnitInterval => ExtLocation::Finite(Rational::ZERO),
            Domain::RealLine => ExtLocation::NegInfinity,
        }
    }

    pub fn top(self) -> ExtLocation {
        match self {
            Domain::UnitInterval => ExtLocation::Finite(Rational::ONE),
            Domain::RealLine => ExtLocation::PosInfinity,
        }
    }

    /// Whether a finite agent location is admissible.
    pub fn contains(self, x: &Rational) -> bool {
        match self {
            Domain::UnitInterval => !x.is_negative() && *x <= Rational::ONE,
            Domain::RealLine => true,
        }
    }

    /// Whether a phantom position is admissible.
    pub fn admits_phantom(self, y: &ExtLocation) -> bool {
        match (self, y) {
            (Domain::UnitInterval, ExtLocation::Finite(v)) => self.contains(v),
            (Domain::UnitInterval, _) => false,
            (Domain::RealLine, _) => true,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::UnitInterval => "unit_interval",
            Domain::RealLine => "real_line",
        })
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unit" | "unit_interval" => Ok(Domain::UnitInterval),
            "real" | "real_line" => Ok(Domain::RealLine),
            other => Err(Error::DomainMismatch(format!("unknown domain {other:?}"))),
        }
    }
}

/// A point of `ℝ ∪ {−∞, +∞}`. The derived order is the order of the
/// extended line because variants are declared bottom to top.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtLocation {
    NegInfinity,
    Finite(Rational),
    PosInfinity,
}

impl ExtLocation {
    pub fn finite(value: Rational) -> Self {
        ExtLocation::Finite(value)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtLocation::Finite(_))
    }

    /// The finite value; infinities never enter arithmetic.
    pub fn value(&self) -> Result<Rational> {
        match self {
            ExtLocation::Finite(v) => Ok(*v),
            _ => Err(Error::InfiniteArithmetic),
        }
    }
}

impl From<Rational> for ExtLocation {
    fn from(value: Rational) -> Self {
        ExtLocation::Finite(value)
    }
}

impl fmt::Display for ExtLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtLocation::NegInfinity => f.write_str("-inf"),
            ExtLocation::Finite(v) => write!(f, "{v}"),
            ExtLocation::PosInfinity => f.write_str("+inf"),
        }
    }
}

impl fmt::Debug for ExtLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExtLocation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "-inf" | "-∞" => Ok(ExtLocation::NegInfinity),
            "+inf" | "inf" | "+∞" | "∞" => Ok(ExtLocation::PosInfinity),
            other => other.parse().map(ExtLocation::Finite),
        }
    }
}

impl Serialize for ExtLocation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtLocation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
