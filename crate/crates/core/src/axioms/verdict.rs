use std::fmt;

use serde::{Serialize, Serializer};

use super::{Axiom, AxiomId, Variant};
use crate::analysis::numeric::{numeric_expectation_oracle, NumericComparison, OracleMode};
use crate::error::{Error, Result};
use crate::mechanism::{DeterministicMechanism, Mechanism};
use crate::profile::Profile;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// A numeric estimate could not separate the quantity from its bound.
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// How `lhs` violates `bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Violation {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "!=")]
    Differs,
}

impl Violation {
    pub fn holds(self, lhs: &Rational, bound: &Rational) -> bool {
        match self {
            Violation::Below => lhs < bound,
            Violation::Above => lhs > bound,
            Violation::Differs => lhs != bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Violation::Below => "<",
            Violation::Above => ">",
            Violation::Differs => "!=",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Misreport {
    /// 1-based agent label.
    pub agent: usize,
    pub to: Rational,
}

/// Numeric estimate behind an inexact witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericNote {
    pub estimate: f64,
    pub error_bound: f64,
    pub margin: f64,
    pub mode: OracleMode,
}

/// A single failing instance. Agent labels are 1-based.
///
/// Anonymity: `lhs = f(x_σ)`, `bound = f(x)`. Strategyproofness: `lhs` is
/// the misreport cost and `bound` the truthful cost. Efficiency: `lhs` is the
/// output and `bound` the violated end of the profile's range. Fairness
/// axioms: `lhs` is the (expected) distance of `agent` and `bound` its
/// allowance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "locations_only")]
    pub profile: Profile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub group: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub misreport: Option<Misreport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<DeterministicMechanism>,
    pub lhs: Rational,
    pub bound: Rational,
    pub relation: Violation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericNote>,
}

fn locations_only<S: Serializer>(p: &Profile, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.locations())
}

impl Witness {
    pub(crate) fn new(profile: Profile, lhs: Rational, bound: Rational, relation: Violation) -> Self {
        Witness {
            profile,
            agent: None,
            group: Vec::new(),
            misreport: None,
            permutation: None,
            component: None,
            lhs,
            bound,
            relation,
            numeric: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.numeric.is_none()
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "profile {}", self.profile)?;
        if let Some(c) = &self.component {
            write!(f, ", component {c}")?;
        }
        if let Some(p) = &self.permutation {
            let labels: Vec<String> = p.iter().map(|i| i.to_string()).collect();
            write!(f, ", permutation ({})", labels.join(" "))?;
        }
        if let Some(m) = &self.misreport {
            write!(f, ", agent {} reports {}", m.agent, m.to)?;
        } else if let Some(a) = self.agent {
            write!(f, ", agent {a}")?;
        }
        if self.group.len() > 1 {
            let labels: Vec<String> = self.group.iter().map(|i| i.to_string()).collect();
            write!(f, ", group {{{}}}", labels.join(","))?;
        }
        let rel = match self.relation {
            Violation::Below => "<",
            Violation::Above => ">",
            Violation::Differs => "!=",
        };
        write!(f, ": {} {rel} {}", self.lhs, self.bound)?;
        if let Some(n) = &self.numeric {
            write!(f, " (estimate {:.9}, error bound {:.1e})", n.estimate, n.error_bound)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomVerdict {
    pub axiom: Axiom,
    pub variant: Variant,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// False when numeric estimates took part.
    pub exact: bool,
    /// Coalitions above the subset cap were not enumerated.
    pub partial_coverage: bool,
    /// Profiles examined.
    pub instances: usize,
}

impl AxiomVerdict {
    pub(crate) fn pass(id: AxiomId, instances: usize) -> Self {
        AxiomVerdict {
            axiom: id.axiom,
            variant: id.variant,
            status: Status::Pass,
            witness: None,
            exact: true,
            partial_coverage: false,
            instances,
        }
    }

    pub fn id(&self) -> AxiomId {
        AxiomId::new(self.axiom, self.variant)
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdict serializes")
    }
}

impl fmt::Display for AxiomVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.axiom, self.variant, self.status)?;
        if let Some(w) = &self.witness {
            write!(f, " at {w}")?;
        }
        if self.partial_coverage {
            f.write_str(" [partial coverage]")?;
        }
        Ok(())
    }
}

fn cost(m: &Mechanism, x: &Profile, point: &Rational) -> Result<Rational> {
    m.expected_distance(x, point)
}

/// Recomputes a witness from scratch and confirms it is a violation with
/// the recorded quantities. Numeric witnesses are re-estimated with the
/// recorded oracle mode and must again clear the error bound.
pub fn verify_witness(m: &Mechanism, id: AxiomId, w: &Witness) -> Result<bool> {
    let subject = match (&w.component, id.variant) {
        (Some(c), Variant::Universal) => {
            let comps = match m {
                Mechanism::Randomized(rm) => rm,
                Mechanism::Deterministic(_) => {
                    return Err(Error::NotApplicable {
                        what: "universal witness".into(),
                        reason: format!("{m} is deterministic"),
                    })
                }
            };
            let listed = comps.components().iter().any(|(d, _)| d == c);
            let realization = comps.uniform_family_weight().is_some() && is_family_realization(c, comps.n());
            if !listed && !realization {
                return Ok(false);
            }
            Mechanism::Deterministic(c.clone())
        }
        (None, Variant::Universal) => return Ok(false),
        _ => m.clone(),
    };
    let x = &w.profile;
    let n = x.n();
    let (lhs, bound) = match id.axiom {
        Axiom::Anonymity => {
            let Some(perm) = &w.permutation else { return Ok(false) };
            let sigma: Vec<usize> = perm.iter().map(|i| i - 1).collect();
            (
                subject.expected_location(&x.permuted(&sigma))?,
                subject.expected_location(x)?,
            )
        }
        Axiom::Strategyproofness => {
            let Some(mis) = &w.misreport else { return Ok(false) };
            let i = mis.agent - 1;
            let own = x.location(i);
            (cost(&subject, &x.with_report(i, mis.to), &own)?, cost(&subject, x, &own)?)
        }
        Axiom::ParetoEfficiency | Axiom::ExPostEfficiency => {
            let y = subject.expected_location(x)?;
            let bound = if y < x.min() { x.min() } else { x.max() };
            (y, bound)
        }
        Axiom::Proportionality | Axiom::StrongProportionality | Axiom::Spf => {
            let Some(agent) = w.agent else { return Ok(false) };
            if w.group.is_empty() || !w.group.contains(&agent) {
                return Ok(false);
            }
            let size = Rational::from(w.group.len());
            let share = (Rational::from(n) - size) / Rational::from(n);
            let bound = match id.axiom {
                Axiom::Proportionality => {
                    if !x.locations().iter().all(|v| v.is_zero() || *v == Rational::ONE) {
                        return Ok(false);
                    }
                    share
                }
                Axiom::StrongProportionality => {
                    if x.distinct_count() > 2 {
                        return Ok(false);
                    }
                    share * x.range()
                }
                _ => {
                    let locs: Vec<Rational> = w.group.iter().map(|i| x.location(i - 1)).collect();
                    let r = *locs.iter().max().unwrap() - *locs.iter().min().unwrap();
                    share * x.range() + r
                }
            };
            if id.axiom != Axiom::Spf {
                let at = x.location(agent - 1);
                if w.group.iter().any(|i| x.location(i - 1) != at) {
                    return Ok(false);
                }
            }
            if let Some(note) = &w.numeric {
                let Mechanism::Randomized(rm) = &subject else { return Ok(false) };
                let est = numeric_expectation_oracle(rm, x, note.mode)?;
                let confirmed = matches!(
                    est.compare_distance(agent - 1, &bound),
                    NumericComparison::Exceeds { .. }
                );
                return Ok(confirmed && bound == w.bound);
            }
            (cost(&subject, x, &x.location(agent - 1))?, bound)
        }
    };
    Ok(lhs == w.lhs && bound == w.bound && w.relation.holds(&lhs, &bound))
}

fn is_family_realization(c: &DeterministicMechanism, n: usize) -> bool {
    match c {
        DeterministicMechanism::Phantom(ys) => {
            ys.len() == n + 1
                && ys.first() == Some(&Rational::ZERO.into())
                && ys.last() == Some(&Rational::ONE.into())
                && ys.iter().all(|y| y.is_finite())
        }
        _ => false,
    }
}
