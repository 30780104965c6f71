//! Exact deciders for the axioms over a finite [`CheckDomain`].
//!
//! Every check returns [`Status::Pass`] or the first failing instance in
//! lexicographic order as a re-checkable [`Witness`]. Profiles are checked in
//! parallel; the reported witness does not depend on scheduling.

mod anonymity;
mod domain;
mod efficiency;
mod fairness;
mod strategyproofness;
mod verdict;

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use anonymity::check_anonymity;
pub use domain::{subsets, CheckDomain, ExpectationMethod, ProfileSpace, MAX_PROFILES};
pub use efficiency::check_efficiency;
pub use fairness::{check_proportionality, check_spf, check_strong_proportionality};
pub use strategyproofness::{check_strategyproofness, check_strategyproofness_dense, critical_reports};
pub use verdict::{verify_witness, AxiomVerdict, Misreport, NumericNote, Status, Violation, Witness};

use crate::error::{Error, Result};
use crate::location::Domain;
use crate::mechanism::{DeterministicMechanism, Mechanism};
use crate::profile::Profile;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Anonymity,
    Strategyproofness,
    ParetoEfficiency,
    ExPostEfficiency,
    Proportionality,
    StrongProportionality,
    Spf,
}

impl Axiom {
    pub const ALL: [Axiom; 7] = [
        Axiom::Anonymity,
        Axiom::Strategyproofness,
        Axiom::ParetoEfficiency,
        Axiom::ExPostEfficiency,
        Axiom::Proportionality,
        Axiom::StrongProportionality,
        Axiom::Spf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Anonymity => "anonymity",
            Axiom::Strategyproofness => "strategyproofness",
            Axiom::ParetoEfficiency => "pareto_efficiency",
            Axiom::ExPostEfficiency => "ex_post_efficiency",
            Axiom::Proportionality => "proportionality",
            Axiom::StrongProportionality => "strong_proportionality",
            Axiom::Spf => "spf",
        }
    }

    /// Variants for which the axiom is defined.
    pub fn variants(self) -> &'static [Variant] {
        use Variant::*;
        match self {
            Axiom::Anonymity | Axiom::Strategyproofness => &[Deterministic, InExpectation, Universal],
            Axiom::ParetoEfficiency => &[Deterministic],
            Axiom::ExPostEfficiency => &[Universal],
            Axiom::Proportionality | Axiom::StrongProportionality | Axiom::Spf => {
                &[Deterministic, InExpectation]
            }
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match key.as_str() {
            "anonymity" | "anonymous" => Axiom::Anonymity,
            "strategyproofness" | "strategyproof" | "sp" | "truthfulness" => Axiom::Strategyproofness,
            "pareto_efficiency" | "pareto" | "efficiency" => Axiom::ParetoEfficiency,
            "ex_post_efficiency" | "ex_post" => Axiom::ExPostEfficiency,
            "proportionality" | "prop" => Axiom::Proportionality,
            "strong_proportionality" | "strong_prop" => Axiom::StrongProportionality,
            "spf" | "strong_proportional_fairness" => Axiom::Spf,
            _ => {
                return Err(Error::NotApplicable {
                    what: format!("axiom {s:?}"),
                    reason: "unknown axiom".into(),
                })
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "deterministic")]
    Deterministic,
    #[serde(rename = "expectation")]
    InExpectation,
    #[serde(rename = "universal")]
    Universal,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Deterministic => "deterministic",
            Variant::InExpectation => "expectation",
            Variant::Universal => "universal",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "det" | "deterministic" => Variant::Deterministic,
            "exp" | "expectation" | "in_expectation" => Variant::InExpectation,
            "universal" | "univ" => Variant::Universal,
            _ => {
                return Err(Error::NotApplicable {
                    what: format!("variant {s:?}"),
                    reason: "expected det, exp or universal".into(),
                })
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxiomId {
    pub axiom: Axiom,
    pub variant: Variant,
}

impl AxiomId {
    pub fn new(axiom: Axiom, variant: Variant) -> Self {
        AxiomId { axiom, variant }
    }
}

/// Runs the check named by `id`.
pub fn check(m: &Mechanism, id: AxiomId, dom: &CheckDomain) -> Result<AxiomVerdict> {
    match id.axiom {
        Axiom::Anonymity => check_anonymity(m, id.variant, dom),
        Axiom::Strategyproofness => check_strategyproofness(m, id.variant, dom),
        Axiom::ParetoEfficiency | Axiom::ExPostEfficiency => check_efficiency(m, id, dom),
        Axiom::Proportionality => check_proportionality(m, id.variant, dom),
        Axiom::StrongProportionality => check_strong_proportionality(m, id.variant, dom),
        Axiom::Spf => check_spf(m, id.variant, dom),
    }
}

/// Rejects axiom/variant/mechanism combinations that are not defined.
pub(crate) fn ensure_applicable(m: &Mechanism, id: AxiomId, dom: &CheckDomain) -> Result<()> {
    dom.validate()?;
    let not = |reason: String| Error::NotApplicable {
        what: format!("{} ({})", id.axiom, id.variant),
        reason,
    };
    if !id.axiom.variants().contains(&id.variant) {
        return Err(not(format!("{} has no {} variant", id.axiom, id.variant)));
    }
    match (m, id.variant) {
        (Mechanism::Randomized(_), Variant::Deterministic) => {
            return Err(not(format!(
                "{m} is randomized; use the expectation or universal variant"
            )))
        }
        (Mechanism::Deterministic(_), Variant::Universal) => {
            return Err(not(format!(
                "{m} is deterministic; wrap it as a degenerate mixture for the universal variant"
            )))
        }
        _ => {}
    }
    match m {
        Mechanism::Deterministic(d) => d.validate(dom.n, dom.domain)?,
        Mechanism::Randomized(r) => {
            if r.n() != dom.n {
                return Err(Error::AgentCount {
                    mechanism: r.n(),
                    profile: dom.n,
                });
            }
            if r.domain() != dom.domain {
                return Err(Error::DomainMismatch(format!(
                    "mechanism on {}, check domain on {}",
                    r.domain(),
                    dom.domain
                )));
            }
        }
    }
    if id.axiom == Axiom::Proportionality && dom.domain != Domain::UnitInterval {
        return Err(not("proportionality is defined on {0,1} profiles of the unit interval".into()));
    }
    Ok(())
}

/// The deterministic mechanisms a universal check ranges over. For the
/// uniform phantom family these are its realizations with interior phantoms
/// on the check grid.
pub fn universal_components(m: &Mechanism, dom: &CheckDomain) -> Result<Vec<DeterministicMechanism>> {
    let Mechanism::Randomized(rm) = m else {
        return Err(Error::NotApplicable {
            what: "universal variant".into(),
            reason: format!("{m} is deterministic"),
        });
    };
    let mut out: Vec<DeterministicMechanism> =
        rm.components().iter().map(|(c, _)| c.clone()).collect();
    if rm.uniform_family_weight().is_some() {
        let points: Vec<Rational> = (0..=dom.grid).map(|k| Rational::new(k, dom.grid)).collect();
        let mut current = Vec::with_capacity(rm.n() - 1);
        grid_realizations(&points, 0, rm.n() - 1, &mut current, &mut out);
    }
    Ok(out)
}

fn grid_realizations(
    points: &[Rational],
    from: usize,
    remaining: usize,
    current: &mut Vec<Rational>,
    out: &mut Vec<DeterministicMechanism>,
) {
    if remaining == 0 {
        let mut ys = vec![Rational::ZERO];
        ys.extend(current.iter().copied());
        ys.push(Rational::ONE);
        out.push(DeterministicMechanism::phantom_at(&ys).expect("sorted grid phantoms"));
        return;
    }
    for k in from..points.len() {
        current.push(points[k]);
        grid_realizations(points, k, remaining - 1, current, out);
        current.pop();
    }
}

/// Whether checks may restrict to sorted profiles: the mechanism is
/// anonymous by construction and the domain is not exhaustive.
pub fn sorted_only(m: &Mechanism, dom: &CheckDomain) -> bool {
    !dom.exhaustive && m.is_anonymous_by_construction()
}

/// Runs a deterministic-variant check on each component in order and
/// reports the first failing component.
pub(crate) fn check_components<F>(
    m: &Mechanism,
    id: AxiomId,
    dom: &CheckDomain,
    inner: F,
) -> Result<AxiomVerdict>
where
    F: Fn(&Mechanism) -> Result<AxiomVerdict>,
{
    let components = universal_components(m, dom)?;
    let mut instances = 0;
    for c in components {
        let verdict = inner(&Mechanism::Deterministic(c.clone()))?;
        instances += verdict.instances;
        if verdict.status != Status::Pass {
            let mut witness = verdict.witness;
            if let Some(w) = witness.as_mut() {
                w.component = Some(c);
            }
            return Ok(AxiomVerdict {
                axiom: id.axiom,
                variant: id.variant,
                status: verdict.status,
                witness,
                exact: verdict.exact,
                partial_coverage: verdict.partial_coverage,
                instances,
            });
        }
    }
    Ok(AxiomVerdict::pass(id, instances))
}

pub(crate) enum Finding {
    Fail(Witness),
    Inconclusive(Witness),
}

/// Checks instances `0..len` in parallel. Returns the first failure in index
/// order and, failing that, the first inconclusive instance.
pub(crate) fn scan<G, F>(len: usize, get: G, check: F) -> Result<(Option<Witness>, Option<Witness>)>
where
    G: Fn(usize) -> Profile + Sync,
    F: Fn(&Profile) -> Result<Option<Finding>> + Sync,
{
    let inconclusive: Mutex<Option<(usize, Witness)>> = Mutex::new(None);
    let first = (0..len).into_par_iter().find_map_first(|i| match check(&get(i)) {
        Err(e) => Some(Err(e)),
        Ok(Some(Finding::Fail(w))) => Some(Ok(w)),
        Ok(Some(Finding::Inconclusive(w))) => {
            let mut slot = inconclusive.lock().expect("lock");
            if slot.as_ref().is_none_or(|(j, _)| i < *j) {
                *slot = Some((i, w));
            }
            None
        }
        Ok(None) => None,
    });
    let fail = first.transpose()?;
    let inconclusive = inconclusive.into_inner().expect("lock").map(|(_, w)| w);
    Ok((fail, inconclusive))
}

pub(crate) fn verdict_from_scan(
    id: AxiomId,
    found: (Option<Witness>, Option<Witness>),
    instances: usize,
    exact: bool,
) -> AxiomVerdict {
    let (status, witness) = match found {
        (Some(w), _) => (Status::Fail, Some(w)),
        (None, Some(w)) => (Status::Inconclusive, Some(w)),
        (None, None) => (Status::Pass, None),
    };
    AxiomVerdict {
        axiom: id.axiom,
        variant: id.variant,
        status,
        witness,
        exact,
        partial_coverage: false,
        instances,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{random_phantom, random_rank};

    #[test]
    fn parse_ids() {
        assert_eq!("strong-proportionality".parse::<Axiom>().unwrap(), Axiom::StrongProportionality);
        assert_eq!("exp".parse::<Variant>().unwrap(), Variant::InExpectation);
        assert!("nope".parse::<Axiom>().is_err());
        for a in Axiom::ALL {
            assert_eq!(a.name().parse::<Axiom>().unwrap(), a);
        }
    }

    #[test]
    fn applicability() {
        let dom = CheckDomain::unit(3, 2);
        let rr: Mechanism = random_rank(3, Domain::UnitInterval).unwrap().into();
        let med = Mechanism::Deterministic(DeterministicMechanism::Median);
        assert!(ensure_applicable(&rr, AxiomId::new(Axiom::Anonymity, Variant::Deterministic), &dom).is_err());
        assert!(ensure_applicable(&med, AxiomId::new(Axiom::Anonymity, Variant::Universal), &dom).is_err());
        assert!(ensure_applicable(&rr, AxiomId::new(Axiom::ParetoEfficiency, Variant::Universal), &dom).is_err());
        assert!(ensure_applicable(&rr, AxiomId::new(Axiom::ExPostEfficiency, Variant::Universal), &dom).is_ok());
        let real = CheckDomain::real(3, 1, 2);
        let rr_real: Mechanism = random_rank(3, Domain::RealLine).unwrap().into();
        assert!(ensure_applicable(&rr_real, AxiomId::new(Axiom::Proportionality, Variant::InExpectation), &real).is_err());
        assert!(ensure_applicable(&rr, AxiomId::new(Axiom::Anonymity, Variant::InExpectation), &CheckDomain::unit(4, 2)).is_err());
    }

    #[test]
    fn continuous_family_realizations() {
        let rp: Mechanism = random_phantom(3, Domain::UnitInterval).unwrap().into();
        let comps = universal_components(&rp, &CheckDomain::unit(3, 2)).unwrap();
        // multisets of size 2 from 3 grid points
        assert_eq!(comps.len(), 6);
    }
}
