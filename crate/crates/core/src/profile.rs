//! Agent location profiles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::location::Domain;
use crate::rational::Rational;

/// Reported (or true) locations of `n >= 2` agents. Agent `i` (1-based in
/// every user-facing label) sits at `locations()[i - 1]`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct Profile {
    domain: Domain,
    locations: Vec<Rational>,
}

#[derive(Deserialize)]
struct RawProfile {
    domain: Domain,
    locations: Vec<Rational>,
}

impl TryFrom<RawProfile> for Profile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        Profile::new(raw.domain, raw.locations)
    }
}

impl Profile {
    pub fn new(domain: Domain, locations: Vec<Rational>) -> Result<Self> {
        if locations.len() < 2 {
            return Err(Error::TooFewAgents(locations.len()));
        }
        if let Some(bad) = locations.iter().find(|x| !domain.contains(x)) {
            return Err(Error::OutOfUnitInterval(*bad));
        }
        Ok(Profile { domain, locations })
    }

    pub fn unit(locations: Vec<Rational>) -> Result<Self> {
        Profile::new(Domain::UnitInterval, locations)
    }

    pub fn real(locations: Vec<Rational>) -> Result<Self> {
        Profile::new(Domain::RealLine, locations)
    }

    pub fn n(&self) -> usize {
        self.locations.len()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn locations(&self) -> &[Rational] {
        &self.locations
    }

    /// Location of the agent at 0-based position `index`.
    pub fn location(&self, index: usize) -> Rational {
        self.locations[index]
    }

    pub fn min(&self) -> Rational {
        *self.locations.iter().min().expect("non-empty profile")
    }

    pub fn max(&self) -> Rational {
        *self.locations.iter().max().expect("non-empty profile")
    }

    pub fn range(&self) -> Rational {
        self.max() - self.min()
    }

    pub fn mean(&self) -> Rational {
        self.locations.iter().sum::<Rational>() / Rational::from(self.n())
    }

    /// The profile with agent `index` (0-based) reporting `report` instead.
    pub fn with_report(&self, index: usize, report: Rational) -> Self {
        let mut locations = self.locations.clone();
        locations[index] = report;
        Profile {
            domain: self.domain,
            locations,
        }
    }

    /// The profile `x_σ` with `x_σ(i) = x_{σ(i)}`; `sigma` is 0-based.
    pub fn permuted(&self, sigma: &[usize]) -> Self {
        let locations = sigma.iter().map(|&j| self.locations[j]).collect();
        Profile {
            domain: self.domain,
            locations,
        }
    }

    /// Number of distinct locations.
    pub fn distinct_count(&self) -> usize {
        let mut v = self.locations.clone();
        v.sort();
        v.dedup();
        v.len()
    }

    /// Parses the inline form `(0, 0, 1/3)`; the parentheses are optional.
    pub fn parse_inline(text: &str, domain: Domain) -> Result<Self> {
        let body = text.trim();
        let body = body.strip_prefix('(').unwrap_or(body);
        let body = body.strip_suffix(')').unwrap_or(body);
        let locations = body
            .split(',')
            .enumerate()
            .map(|(i, field)| {
                field.trim().parse::<Rational>().map_err(|e| {
                    Error::Profile(format!("location {} ({:?}): {e}", i + 1, field.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Profile::new(domain, locations)
    }

    /// Parses the JSON file format
    /// `{"domain": "unit_interval", "locations": ["0", "1/3"]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Profile(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.locations.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
