//! Deterministic mechanisms, finite mixtures of them, and the i.i.d. uniform
//! phantom family.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::analysis::order_stats;
use crate::error::{Error, Result};
use crate::location::{Domain, ExtLocation};
use crate::outcome::OutcomeDistribution;
use crate::profile::Profile;
use crate::rational::Rational;

/// A deterministic facility-location rule.
///
/// Ranks count from the top: `RankK(1)` returns the largest report and
/// `RankK(n)` the smallest. `Median` is the leftmost median for even `n`.
/// `Dictator` takes a 1-based agent label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DeterministicMechanism {
    /// Median of the reports and `n + 1` sorted phantoms.
    Phantom(Vec<ExtLocation>),
    RankK(usize),
    Dictator(usize),
    Median,
    /// Phantoms at `j / n` for `j = 0..=n`.
    UniformPhantom,
    Average,
}

impl DeterministicMechanism {
    /// A phantom mechanism; phantoms must already be sorted.
    pub fn phantom(phantoms: Vec<ExtLocation>) -> Result<Self> {
        if phantoms.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::UnsortedPhantoms);
        }
        Ok(DeterministicMechanism::Phantom(phantoms))
    }

    /// Finite phantoms given as rationals.
    pub fn phantom_at(phantoms: &[Rational]) -> Result<Self> {
        Self::phantom(phantoms.iter().copied().map(ExtLocation::Finite).collect())
    }

    /// Checks that the mechanism makes sense for `n` agents on `domain`.
    pub fn validate(&self, n: usize, domain: Domain) -> Result<()> {
        match self {
            DeterministicMechanism::Phantom(ys) => validate_phantoms(ys, n, domain),
            DeterministicMechanism::RankK(k) if *k == 0 || *k > n => {
                Err(Error::RankIndex { k: *k, n })
            }
            DeterministicMechanism::Dictator(i) if *i == 0 || *i > n => {
                Err(Error::AgentIndex { index: *i, n })
            }
            DeterministicMechanism::UniformPhantom if domain == Domain::RealLine => Err(
                Error::DomainMismatch("the uniform phantom mechanism lives on [0, 1]".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Facility location on `x`. Always finite.
    pub fn evaluate(&self, x: &Profile) -> Result<Rational> {
        let n = x.n();
        match self {
            DeterministicMechanism::Phantom(ys) => {
                validate_phantoms(ys, n, x.domain())?;
                median_with_phantoms(x.locations(), ys)
            }
            DeterministicMechanism::RankK(k) => {
                self.validate(n, x.domain())?;
                Ok(kth_largest(x.locations(), *k))
            }
            DeterministicMechanism::Dictator(i) => {
                self.validate(n, x.domain())?;
                Ok(x.location(i - 1))
            }
            DeterministicMechanism::Median => Ok(kth_largest(x.locations(), median_rank(n))),
            DeterministicMechanism::UniformPhantom => {
                self.validate(n, x.domain())?;
                median_with_phantoms(x.locations(), &uniform_phantoms(n))
            }
            DeterministicMechanism::Average => Ok(x.mean()),
        }
    }

    /// The equivalent `Phantom` form for `n` agents on `domain`.
    ///
    /// `RankK(k)` becomes `k` phantoms at the bottom of the domain (0 or −∞)
    /// and `n + 1 − k` at the top (1 or +∞); the outermost two are the fixed
    /// endpoints every efficient phantom mechanism carries.
    pub fn to_phantom_form(&self, n: usize, domain: Domain) -> Result<Self> {
        self.validate(n, domain)?;
        let phantoms = match self {
            DeterministicMechanism::Phantom(ys) => ys.clone(),
            DeterministicMechanism::RankK(k) => rank_phantoms(n, *k, domain),
            DeterministicMechanism::Median => rank_phantoms(n, median_rank(n), domain),
            DeterministicMechanism::UniformPhantom => uniform_phantoms(n),
            DeterministicMechanism::Dictator(_) | DeterministicMechanism::Average => {
                return Err(Error::NotPhantomRepresentable(self.to_string()))
            }
        };
        Ok(DeterministicMechanism::Phantom(phantoms))
    }

    /// Whether the rule ignores agent labels. Only dictatorships do not.
    pub fn is_anonymous(&self) -> bool {
        !matches!(self, DeterministicMechanism::Dictator(_))
    }

    /// Finite phantom values of the phantom form (empty for non-phantom rules).
    pub fn phantom_values(&self, n: usize, domain: Domain) -> Vec<Rational> {
        match self.to_phantom_form(n, domain) {
            Ok(DeterministicMechanism::Phantom(ys)) => {
                ys.iter().filter_map(|y| y.value().ok()).collect()
            }
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for DeterministicMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeterministicMechanism::Phantom(ys) => {
                f.write_str("phantom:[")?;
                for (i, y) in ys.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{y}")?;
                }
                f.write_str("]")
            }
            DeterministicMechanism::RankK(k) => write!(f, "rank:k={k}"),
            DeterministicMechanism::Dictator(i) => write!(f, "dictator:i={i}"),
            DeterministicMechanism::Median => f.write_str("median"),
            DeterministicMechanism::UniformPhantom => f.write_str("uniform_phantom"),
            DeterministicMechanism::Average => f.write_str("average"),
        }
    }
}

impl Serialize for DeterministicMechanism {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn validate_phantoms(ys: &[ExtLocation], n: usize, domain: Domain) -> Result<()> {
    if ys.len() != n + 1 {
        return Err(Error::PhantomCount {
            n,
            expected: n + 1,
            got: ys.len(),
        });
    }
    if ys.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedPhantoms);
    }
    if let Some(bad) = ys.iter().find(|y| !domain.admits_phantom(y)) {
        return Err(Error::DomainMismatch(format!(
            "phantom {bad} is not allowed on {domain}"
        )));
    }
    Ok(())
}

/// Leftmost median as a rank from the top.
pub(crate) fn median_rank(n: usize) -> usize {
    n / 2 + 1
}

fn rank_phantoms(n: usize, k: usize, domain: Domain) -> Vec<ExtLocation> {
    let mut ys = vec![domain.bottom(); k];
    ys.extend(std::iter::repeat_n(domain.top(), n + 1 - k));
    ys
}

fn uniform_phantoms(n: usize) -> Vec<ExtLocation> {
    (0..=n)
        .map(|j| ExtLocation::Finite(Rational::new(j as i128, n as i128)))
        .collect()
}

fn kth_largest(xs: &[Rational], k: usize) -> Rational {
    let mut v = xs.to_vec();
    let idx = v.len() - k;
    *v.select_nth_unstable(idx).1
}

fn median_with_phantoms(xs: &[Rational], ys: &[ExtLocation]) -> Result<Rational> {
    let mut all: Vec<ExtLocation> = xs.iter().copied().map(ExtLocation::Finite).collect();
    all.extend_from_slice(ys);
    let mid = xs.len();
    let (_, m, _) = all.select_nth_unstable(mid);
    match m {
        ExtLocation::Finite(v) => Ok(*v),
        _ => Err(Error::InfiniteOutcome),
    }
}

/// Distribution of the i.i.d. phantoms of an i.i.d. phantom mechanism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PhantomDistribution {
    UniformOn01,
    /// `(location, probability)` pairs.
    DiscreteAtoms(Vec<(Rational, Rational)>),
}

/// An i.i.d. phantom mechanism: endpoint phantoms fixed at 0 and 1, the other
/// `n − 1` drawn independently from `distribution`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IidPhantomSpec {
    pub distribution: PhantomDistribution,
}

impl IidPhantomSpec {
    pub fn uniform() -> Self {
        IidPhantomSpec {
            distribution: PhantomDistribution::UniformOn01,
        }
    }

    pub fn discrete(atoms: Vec<(Rational, Rational)>) -> Result<Self> {
        let spec = IidPhantomSpec {
            distribution: PhantomDistribution::DiscreteAtoms(atoms),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let PhantomDistribution::DiscreteAtoms(atoms) = &self.distribution {
            if atoms.is_empty() {
                return Err(Error::Probability("no atoms".into()));
            }
            for (x, p) in atoms {
                if !Domain::UnitInterval.contains(x) {
                    return Err(Error::OutOfUnitInterval(*x));
                }
                if !p.is_positive() {
                    return Err(Error::Probability(format!("atom {x} has probability {p}")));
                }
            }
            let total: Rational = atoms.iter().map(|(_, p)| *p).sum();
            if total != Rational::ONE {
                return Err(Error::Probability(format!("atoms sum to {total}, not 1")));
            }
        }
        Ok(())
    }
}

/// A finite mixture of deterministic mechanisms, optionally mixed with the
/// i.i.d. uniform phantom family (whose realizations are not enumerable and
/// are handled through closed forms).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomizedMechanism {
    label: String,
    n: usize,
    domain: Domain,
    components: Vec<(DeterministicMechanism, Rational)>,
    uniform_family: Option<Rational>,
}

impl RandomizedMechanism {
    /// Zero-weight components are dropped; the remaining weights and the
    /// family weight must be positive and sum to one.
    pub fn new(
        label: impl Into<String>,
        n: usize,
        domain: Domain,
        components: Vec<(DeterministicMechanism, Rational)>,
        uniform_family: Option<Rational>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewAgents(n));
        }
        let mut kept = Vec::with_capacity(components.len());
        for (m, w) in components {
            if w.is_negative() {
                return Err(Error::Probability(format!("component {m} has weight {w}")));
            }
            if w.is_zero() {
                continue;
            }
            m.validate(n, domain)?;
            kept.push((m, w));
        }
        let uniform_family = match uniform_family {
            Some(w) if w.is_negative() => {
                return Err(Error::Probability(format!("family weight {w}")))
            }
            Some(w) if w.is_zero() => None,
            Some(w) => {
                if domain != Domain::UnitInterval {
                    return Err(Error::DomainMismatch(
                        "uniform random phantoms live on [0, 1]".into(),
                    ));
                }
                Some(w)
            }
            None => None,
        };
        let total: Rational = kept.iter().map(|(_, w)| *w).sum::<Rational>()
            + uniform_family.unwrap_or(Rational::ZERO);
        if total != Rational::ONE {
            return Err(Error::Probability(format!("weights sum to {total}, not 1")));
        }
        Ok(RandomizedMechanism {
            label: label.into(),
            n,
            domain,
            components: kept,
            uniform_family,
        })
    }

    /// A single deterministic mechanism viewed as a (trivial) mixture.
    pub fn degenerate(m: DeterministicMechanism, n: usize, domain: Domain) -> Result<Self> {
        let label = m.to_string();
        RandomizedMechanism::new(label, n, domain, vec![(m, Rational::ONE)], None)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn components(&self) -> &[(DeterministicMechanism, Rational)] {
        &self.components
    }

    /// Weight of the i.i.d. uniform phantom family, if present.
    pub fn uniform_family_weight(&self) -> Option<Rational> {
        self.uniform_family
    }

    pub fn is_finite(&self) -> bool {
        self.uniform_family.is_none()
    }

    fn check_profile(&self, x: &Profile) -> Result<()> {
        if x.n() != self.n {
            return Err(Error::AgentCount {
                mechanism: self.n,
                profile: x.n(),
            });
        }
        if x.domain() != self.domain {
            return Err(Error::DomainMismatch(format!(
                "mechanism on {}, profile on {}",
                self.domain,
                x.domain()
            )));
        }
        Ok(())
    }

    /// Pushforward of the mixture through `evaluate`.
    pub fn outcome_distribution(&self, x: &Profile) -> Result<OutcomeDistribution> {
        self.check_profile(x)?;
        if self.uniform_family.is_some() {
            // every realization is unanimous-respecting; anything else is continuous
            if x.distinct_count() == 1 {
                return Ok(OutcomeDistribution::point(x.location(0)));
            }
            return Err(Error::ContinuousOutcome);
        }
        let atoms = self
            .components
            .iter()
            .map(|(m, w)| m.evaluate(x).map(|y| (y, *w)))
            .collect::<Result<Vec<_>>>()?;
        OutcomeDistribution::from_weighted(atoms)
    }

    pub fn expected_location(&self, x: &Profile) -> Result<Rational> {
        self.check_profile(x)?;
        let mut total = Rational::ZERO;
        for (m, w) in &self.components {
            total += m.evaluate(x)? * *w;
        }
        if let Some(w) = self.uniform_family {
            total += order_stats::uniform_family_expected_location(x)? * w;
        }
        Ok(total)
    }

    /// `E[|f(x) − point|]`, exact.
    pub fn expected_distance(&self, x: &Profile, point: &Rational) -> Result<Rational> {
        self.check_profile(x)?;
        let mut total = Rational::ZERO;
        for (m, w) in &self.components {
            total += m.evaluate(x)?.abs_diff(point) * *w;
        }
        if let Some(w) = self.uniform_family {
            total += order_stats::uniform_family_expected_distance(x, point)? * w;
        }
        Ok(total)
    }

    /// Every component ignores labels.
    pub fn is_anonymous_by_construction(&self) -> bool {
        self.components.iter().all(|(m, _)| m.is_anonymous())
    }
}

impl fmt::Display for RandomizedMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Either kind of mechanism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mechanism {
    Deterministic(DeterministicMechanism),
    Randomized(RandomizedMechanism),
}

impl Mechanism {
    /// Expected facility location (the location itself for deterministic rules).
    pub fn expected_location(&self, x: &Profile) -> Result<Rational> {
        match self {
            Mechanism::Deterministic(m) => m.evaluate(x),
            Mechanism::Randomized(m) => m.expected_location(x),
        }
    }

    /// Expected distance from `point` to the facility.
    pub fn expected_distance(&self, x: &Profile, point: &Rational) -> Result<Rational> {
        match self {
            Mechanism::Deterministic(m) => Ok(m.evaluate(x)?.abs_diff(point)),
            Mechanism::Randomized(m) => m.expected_distance(x, point),
        }
    }

    /// Distribution of the facility location; fails for continuous families.
    pub fn outcome_distribution(&self, x: &Profile) -> Result<OutcomeDistribution> {
        match self {
            Mechanism::Deterministic(m) => Ok(OutcomeDistribution::point(m.evaluate(x)?)),
            Mechanism::Randomized(m) => m.outcome_distribution(x),
        }
    }

    pub fn is_anonymous_by_construction(&self) -> bool {
        match self {
            Mechanism::Deterministic(m) => m.is_anonymous(),
            Mechanism::Randomized(m) => m.is_anonymous_by_construction(),
        }
    }

    /// Finite phantom values of every component.
    pub fn phantom_values(&self, n: usize, domain: Domain) -> Vec<Rational> {
        let mut out = match self {
            Mechanism::Deterministic(m) => m.phantom_values(n, domain),
            Mechanism::Randomized(m) => m
                .components()
                .iter()
                .flat_map(|(c, _)| c.phantom_values(n, domain))
                .collect(),
        };
        out.sort();
        out.dedup();
        out
    }

    /// Whether some component places the facility at the mean report.
    pub fn has_average(&self) -> bool {
        match self {
            Mechanism::Deterministic(m) => *m == DeterministicMechanism::Average,
            Mechanism::Randomized(m) => m
                .components()
                .iter()
                .any(|(c, _)| *c == DeterministicMechanism::Average),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Mechanism::Deterministic(_))
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mechanism::Deterministic(m) => write!(f, "{m}"),
            Mechanism::Randomized(m) => write!(f, "{m}"),
        }
    }
}

impl From<DeterministicMechanism> for Mechanism {
    fn from(m: DeterministicMechanism) -> Self {
        Mechanism::Deterministic(m)
    }
}

impl From<RandomizedMechanism> for Mechanism {
    fn from(m: RandomizedMechanism) -> Self {
        Mechanism::Randomized(m)
    }
}
