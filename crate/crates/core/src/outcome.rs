//! Finite distributions over facility locations.

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A finite distribution over facility locations. Atoms are sorted by
/// location, carry strictly positive probability, and sum to exactly one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeDistribution {
    atoms: Vec<(Rational, Rational)>,
}

impl OutcomeDistribution {
    /// Merges equal locations and drops zero-probability atoms.
    pub fn from_weighted<I>(weighted: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (x, p) in weighted {
            if p.is_negative() {
                return Err(Error::Probability(format!("negative probability {p} at {x}")));
            }
            *merged.entry(x).or_insert(Rational::ZERO) += p;
        }
        let atoms: Vec<_> = merged.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        let total: Rational = atoms.iter().map(|(_, p)| *p).sum();
        if total != Rational::ONE {
            return Err(Error::Probability(format!("probabilities sum to {total}, not 1")));
        }
        Ok(OutcomeDistribution { atoms })
    }

    pub fn point(x: Rational) -> Self {
        OutcomeDistribution {
            atoms: vec![(x, Rational::ONE)],
        }
    }

    pub fn atoms(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    pub fn probability_at(&self, x: &Rational) -> Rational {
        self.atoms
            .iter()
            .find(|(y, _)| y == x)
            .map(|(_, p)| *p)
            .unwrap_or(Rational::ZERO)
    }

    pub fn expected_location(&self) -> Rational {
        self.atoms.iter().map(|(x, p)| *x * *p).sum()
    }

    /// `Σ p · |x − point|`
    pub fn expected_distance(&self, point: &Rational) -> Rational {
        self.atoms.iter().map(|(x, p)| x.abs_diff(point) * *p).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distribution serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct Atom {
    x: Rational,
    p: Rational,
}

impl Serialize for OutcomeDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let atoms: Vec<Atom> = self.atoms.iter().map(|&(x, p)| Atom { x, p }).collect();
        let mut st = serializer.serialize_struct("OutcomeDistribution", 1)?;
        st.serialize_field("atoms", &atoms)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for OutcomeDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            atoms: Vec<Atom>,
        }
        let raw = Raw::deserialize(deserializer)?;
        OutcomeDistribution::from_weighted(raw.atoms.into_iter().map(|a| (a.x, a.p)))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn merges_and_drops_zero_atoms() {
        let d = OutcomeDistribution::from_weighted([
            (q(0, 1), q(1, 3)),
            (q(1, 3), q(0, 1)),
            (q(0, 1), q(1, 3)),
            (q(1, 3), q(1, 3)),
        ])
        .unwrap();
        assert_eq!(d.atoms(), &[(q(0, 1), q(2, 3)), (q(1, 3), q(1, 3))]);
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(OutcomeDistribution::from_weighted([(q(0, 1), q(1, 2))]).is_err());
        assert!(OutcomeDistribution::from_weighted([(q(0, 1), q(3, 2)), (q(1, 1), q(-1, 2))]).is_err());
    }

    #[test]
    fn expected_distances() {
        let d = OutcomeDistribution::from_weighted([(q(0, 1), q(2, 3)), (q(1, 3), q(1, 3))]).unwrap();
        assert_eq!(d.expected_location(), q(1, 9));
        assert_eq!(d.expected_distance(&q(0, 1)), q(1, 9));
        assert_eq!(OutcomeDistribution::point(q(2, 5)).expected_distance(&q(2, 5)), Rational::ZERO);
        let half = OutcomeDistribution::from_weighted([(q(0, 1), q(1, 2)), (q(1, 1), q(1, 2))]).unwrap();
        // brute force over atoms
        let brute: Rational = half
            .atoms()
            .iter()
            .map(|(x, p)| *p * if *x > q(1, 4) { *x - q(1, 4) } else { q(1, 4) - *x })
            .sum();
        assert_eq!(half.expected_distance(&q(1, 4)), q(1, 2));
        assert_eq!(brute, q(1, 2));
    }

    #[test]
    fn json_shape() {
        let d = OutcomeDistribution::from_weighted([(q(0, 1), q(2, 3)), (q(1, 3), q(1, 3))]).unwrap();
        let json = d.to_json();
        assert_eq!(json, r#"{"atoms":[{"x":"0","p":"2/3"},{"x":"1/3","p":"1/3"}]}"#);
        let back: OutcomeDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
