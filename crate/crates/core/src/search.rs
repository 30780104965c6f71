//! Most profitable unilateral misreport over a check domain.

use rayon::prelude::*;
use serde::Serialize;

use crate::axioms::{critical_reports, sorted_only, CheckDomain};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::profile::Profile;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Manipulation {
    #[serde(serialize_with = "locations_only")]
    pub profile: Profile,
    /// 1-based agent label.
    pub agent: usize,
    pub report: Rational,
    pub truthful_cost: Rational,
    pub misreport_cost: Rational,
    pub gain: Rational,
}

fn locations_only<S: serde::Serializer>(p: &Profile, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.locations())
}

/// The misreport with the largest exact (expected) cost reduction, ties
/// broken by the first profile, agent and report in increasing order.
/// `None` when no agent can gain anywhere on the domain.
pub fn search_manipulation(m: &Mechanism, dom: &CheckDomain) -> Result<Option<Manipulation>> {
    dom.validate()?;
    if let Mechanism::Randomized(rm) = m {
        if rm.n() != dom.n || rm.domain() != dom.domain {
            return Err(Error::CheckDomain(format!(
                "{m} is defined for {} agents on {}",
                rm.n(),
                rm.domain()
            )));
        }
    }
    if let Mechanism::Deterministic(d) = m {
        d.validate(dom.n, dom.domain)?;
    }
    let sorted = sorted_only(m, dom);
    let space = dom.profiles(sorted)?;
    let per_profile = (0..space.len())
        .into_par_iter()
        .map(|i| best_on(m, &space.get(i), dom, sorted))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_profile
        .into_iter()
        .flatten()
        .fold(None, |best: Option<Manipulation>, c| match best {
            Some(b) if b.gain >= c.gain => Some(b),
            _ => Some(c),
        }))
}

fn best_on(m: &Mechanism, x: &Profile, dom: &CheckDomain, sorted: bool) -> Result<Option<Manipulation>> {
    let mut best: Option<Manipulation> = None;
    for agent in 0..x.n() {
        if sorted && agent > 0 && x.location(agent - 1) == x.location(agent) {
            continue;
        }
        let own = x.location(agent);
        let truthful = m.expected_distance(x, &own)?;
        for r in critical_reports(m, x, agent, dom) {
            if r == own {
                continue;
            }
            let lie = m.expected_distance(&x.with_report(agent, r), &own)?;
            let gain = truthful - lie;
            if gain.is_positive() && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Manipulation {
                    profile: x.clone(),
                    agent: agent + 1,
                    report: r,
                    truthful_cost: truthful,
                    misreport_cost: lie,
                    gain,
                });
            }
        }
    }
    Ok(best)
}
