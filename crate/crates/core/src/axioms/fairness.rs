//! Fairness axioms: proportionality and its strong variants.

use super::{
    ensure_applicable, scan, sorted_only, subsets, verdict_from_scan, Axiom, AxiomId,
    AxiomVerdict, CheckDomain, ExpectationMethod, Finding, NumericNote, Variant, Violation,
    Witness,
};
use crate::analysis::numeric::{numeric_expectation_oracle, NumericComparison, NumericEstimate, OracleMode};
use crate::error::Result;
use crate::location::Domain;
use crate::mechanism::Mechanism;
use crate::profile::Profile;
use crate::rational::Rational;
use crate::axioms::ProfileSpace;

/// Per-agent (expected) distances on one profile.
enum Distances {
    Exact(Vec<Rational>),
    Numeric(NumericEstimate, OracleMode),
}

fn uses_oracle(m: &Mechanism, dom: &CheckDomain) -> Option<OracleMode> {
    match (dom.expectation, m) {
        (ExpectationMethod::Numeric(mode), Mechanism::Randomized(rm))
            if rm.uniform_family_weight().is_some() =>
        {
            Some(mode)
        }
        _ => None,
    }
}

fn distances(m: &Mechanism, x: &Profile, dom: &CheckDomain) -> Result<Distances> {
    if let (Some(mode), Mechanism::Randomized(rm)) = (uses_oracle(m, dom), m) {
        return Ok(Distances::Numeric(numeric_expectation_oracle(rm, x, mode)?, mode));
    }
    let mut cache: Vec<(Rational, Rational)> = Vec::new();
    let mut out = Vec::with_capacity(x.n());
    for v in x.locations() {
        let d = match cache.iter().find(|(at, _)| at == v) {
            Some((_, d)) => *d,
            None => {
                let d = m.expected_distance(x, v)?;
                cache.push((*v, d));
                d
            }
        };
        out.push(d);
    }
    Ok(Distances::Exact(out))
}

/// Nearest rational with denominator `10^12`.
fn approximate(v: f64) -> Rational {
    const SCALE: f64 = 1e12;
    Rational::new((v * SCALE).round() as i128, SCALE as i128)
}

fn judge(d: &Distances, x: &Profile, agent: usize, group: &[usize], bound: Rational) -> Option<Finding> {
    let witness = |lhs: Rational| {
        let mut w = Witness::new(x.clone(), lhs, bound, Violation::Above);
        w.agent = Some(agent + 1);
        w.group = group.iter().map(|i| i + 1).collect();
        w
    };
    match d {
        Distances::Exact(ds) => (ds[agent] > bound).then(|| Finding::Fail(witness(ds[agent]))),
        Distances::Numeric(est, mode) => {
            let estimate = est.expected_distances[agent];
            let note = |margin| NumericNote {
                estimate,
                error_bound: est.error_bound,
                margin,
                mode: *mode,
            };
            match est.compare_distance(agent, &bound) {
                NumericComparison::Below { .. } => None,
                NumericComparison::Exceeds { margin } => {
                    let mut w = witness(approximate(estimate));
                    w.numeric = Some(note(margin));
                    Some(Finding::Fail(w))
                }
                NumericComparison::Inconclusive { difference } => {
                    let mut w = witness(approximate(estimate));
                    w.numeric = Some(note(difference));
                    Some(Finding::Inconclusive(w))
                }
            }
        }
    }
}

/// Maximal groups of co-located agents, by increasing location.
fn colocated_groups(x: &Profile) -> Vec<Vec<usize>> {
    let mut values: Vec<Rational> = x.locations().to_vec();
    values.sort();
    values.dedup();
    values
        .iter()
        .map(|v| (0..x.n()).filter(|&i| x.location(i) == *v).collect())
        .collect()
}

fn group_check(m: &Mechanism, x: &Profile, dom: &CheckDomain, scale: Rational) -> Result<Option<Finding>> {
    let d = distances(m, x, dom)?;
    let n = Rational::from(x.n());
    let mut pending = None;
    for group in colocated_groups(x) {
        let bound = (n - Rational::from(group.len())) / n * scale;
        match judge(&d, x, group[0], &group, bound) {
            Some(Finding::Fail(w)) => return Ok(Some(Finding::Fail(w))),
            Some(f) => pending = pending.or(Some(f)),
            None => {}
        }
    }
    Ok(pending)
}

/// On every profile in `{0,1}ⁿ`, each maximal co-located group `S` has
/// (expected) distance at most `(n − |S|)/n`.
pub fn check_proportionality(m: &Mechanism, variant: Variant, dom: &CheckDomain) -> Result<AxiomVerdict> {
    let id = AxiomId::new(Axiom::Proportionality, variant);
    ensure_applicable(m, id, dom)?;
    let space = ProfileSpace::new(
        vec![Rational::ZERO, Rational::ONE],
        dom.n,
        Domain::UnitInterval,
        sorted_only(m, dom),
    )?;
    let found = scan(space.len(), |i| space.get(i), |x| group_check(m, x, dom, Rational::ONE))?;
    Ok(verdict_from_scan(id, found, space.len(), uses_oracle(m, dom).is_none()))
}

/// Profiles in `{α,β}ⁿ` for grid pairs `α < β`, ordered by `(α, β, profile)`.
pub(crate) fn two_valued_profiles(m: &Mechanism, dom: &CheckDomain) -> Result<Vec<Profile>> {
    let points = dom.grid_points();
    let sorted = sorted_only(m, dom);
    let mut out = Vec::new();
    for (i, alpha) in points.iter().enumerate() {
        for beta in &points[i + 1..] {
            let space = ProfileSpace::new(vec![*alpha, *beta], dom.n, dom.domain, sorted)?;
            out.extend((0..space.len()).map(|k| space.get(k)));
        }
    }
    Ok(out)
}

/// On every two-valued grid profile with values `α < β`, each maximal
/// co-located group `S` has (expected) distance at most `(n − |S|)/n·(β − α)`.
pub fn check_strong_proportionality(
    m: &Mechanism,
    variant: Variant,
    dom: &CheckDomain,
) -> Result<AxiomVerdict> {
    let id = AxiomId::new(Axiom::StrongProportionality, variant);
    ensure_applicable(m, id, dom)?;
    let profiles = two_valued_profiles(m, dom)?;
    let found = scan(profiles.len(), |i| profiles[i].clone(), |x| {
        group_check(m, x, dom, x.range())
    })?;
    Ok(verdict_from_scan(id, found, profiles.len(), uses_oracle(m, dom).is_none()))
}

/// On every grid profile with range `R` and every coalition `S` with range
/// `r`, each member's (expected) distance is at most `R(n − |S|)/n + r`.
pub fn check_spf(m: &Mechanism, variant: Variant, dom: &CheckDomain) -> Result<AxiomVerdict> {
    let id = AxiomId::new(Axiom::Spf, variant);
    ensure_applicable(m, id, dom)?;
    let (cap, partial) = dom.subset_cap();
    let coalitions: Vec<Vec<usize>> = subsets(dom.n, cap).collect();
    let space = dom.profiles(sorted_only(m, dom))?;
    let n = Rational::from(dom.n);
    let found = scan(space.len(), |i| space.get(i), |x| {
        let d = distances(m, x, dom)?;
        let range = x.range();
        let mut pending = None;
        for s in &coalitions {
            let locs = s.iter().map(|&i| x.location(i));
            let r = locs.clone().max().unwrap() - locs.min().unwrap();
            let bound = range * (n - Rational::from(s.len())) / n + r;
            for &i in s {
                match judge(&d, x, i, s, bound) {
                    Some(Finding::Fail(w)) => return Ok(Some(Finding::Fail(w))),
                    Some(f) => pending = pending.or(Some(f)),
                    None => {}
                }
            }
        }
        Ok(pending)
    })?;
    let mut verdict = verdict_from_scan(id, found, space.len(), uses_oracle(m, dom).is_none());
    verdict.partial_coverage = partial;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::numeric::OracleMode;
    use crate::axioms::{verify_witness, Status};
    use crate::mechanism::{DeterministicMechanism, RandomizedMechanism};
    use crate::mechanisms::{average_or_random_rank, random_dictator, random_phantom, random_rank};
    use crate::rational::q;

    fn det(m: DeterministicMechanism) -> Mechanism {
        Mechanism::Deterministic(m)
    }

    #[test]
    fn median_proportionality_witness() {
        let m = det(DeterministicMechanism::Median);
        let v = check_proportionality(&m, Variant::Deterministic, &CheckDomain::unit(3, 2)).unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.profile.locations(), &[q(0, 1), q(0, 1), q(1, 1)]);
        assert_eq!((w.agent, w.lhs, w.bound), (Some(3), q(1, 1), q(2, 3)));
        assert!(verify_witness(&m, AxiomId::new(Axiom::Proportionality, Variant::Deterministic), &w).unwrap());
    }

    #[test]
    fn averaging_rules_are_proportional() {
        for n in 2..=6 {
            let dom = CheckDomain::unit(n, 2);
            let up = det(DeterministicMechanism::UniformPhantom);
            assert!(check_proportionality(&up, Variant::Deterministic, &dom).unwrap().passed());
            let rp: Mechanism = random_phantom(n, Domain::UnitInterval).unwrap().into();
            assert!(check_proportionality(&rp, Variant::InExpectation, &dom).unwrap().passed());
        }
    }

    #[test]
    fn strong_proportionality_of_random_rank() {
        for n in 2..=5 {
            let rr: Mechanism = random_rank(n, Domain::UnitInterval).unwrap().into();
            let v = check_strong_proportionality(&rr, Variant::InExpectation, &CheckDomain::unit(n, 12)).unwrap();
            assert!(v.passed(), "n = {n}");
        }
        let rr: Mechanism = random_rank(3, Domain::RealLine).unwrap().into();
        assert!(check_strong_proportionality(&rr, Variant::InExpectation, &CheckDomain::real(3, 1, 10))
            .unwrap()
            .passed());
    }

    #[test]
    fn strong_proportionality_failures() {
        let id = AxiomId::new(Axiom::StrongProportionality, Variant::Deterministic);
        let dom = CheckDomain::unit(2, 4);
        let up = det(DeterministicMechanism::UniformPhantom);
        let v = check_strong_proportionality(&up, Variant::Deterministic, &dom).unwrap();
        assert!(v.failed());
        assert!(verify_witness(&up, id, v.witness.as_ref().unwrap()).unwrap());
        // (0, 1/2): output 1/2, the agent at 0 may be at most 1/4 away
        let x = Profile::unit(vec![q(0, 1), q(1, 2)]).unwrap();
        let mut w = Witness::new(x, q(1, 2), q(1, 4), Violation::Above);
        w.agent = Some(1);
        w.group = vec![1];
        assert!(verify_witness(&up, id, &w).unwrap());

        let med = det(DeterministicMechanism::Median);
        assert!(check_strong_proportionality(&med, Variant::Deterministic, &dom).unwrap().failed());
        // leftmost median on (0, 1/2) is 0: the agent at 1/2 is 1/2 away, allowed 1/4
        let x = Profile::unit(vec![q(0, 1), q(1, 2)]).unwrap();
        let mut w = Witness::new(x, q(1, 2), q(1, 4), Violation::Above);
        w.agent = Some(2);
        w.group = vec![2];
        assert!(verify_witness(&med, id, &w).unwrap());
    }

    #[test]
    fn random_phantom_strong_proportionality() {
        let rp: Mechanism = random_phantom(3, Domain::UnitInterval).unwrap().into();
        let id = AxiomId::new(Axiom::StrongProportionality, Variant::InExpectation);
        let exact = check_strong_proportionality(&rp, Variant::InExpectation, &CheckDomain::unit(3, 4)).unwrap();
        assert!(exact.failed() && exact.exact);
        assert!(verify_witness(&rp, id, exact.witness.as_ref().unwrap()).unwrap());

        let numeric = CheckDomain::unit(3, 4).with_expectation(ExpectationMethod::Numeric(OracleMode::quadrature()));
        let v = check_strong_proportionality(&rp, Variant::InExpectation, &numeric).unwrap();
        assert_eq!(v.status, Status::Fail);
        assert!(!v.exact);
        let w = v.witness.unwrap();
        assert!(w.numeric.as_ref().unwrap().margin > 1e-6);
        assert!(verify_witness(&rp, id, &w).unwrap());

        // proportionality holds with equality, which floating point cannot confirm
        let p = check_proportionality(&rp, Variant::InExpectation, &numeric).unwrap();
        assert_eq!(p.status, Status::Inconclusive);
    }

    #[test]
    fn spf() {
        let dom = CheckDomain::unit(3, 6);
        let rr: Mechanism = random_rank(3, Domain::UnitInterval).unwrap().into();
        let v = check_spf(&rr, Variant::InExpectation, &dom).unwrap();
        assert!(v.passed() && !v.partial_coverage);
        let med = det(DeterministicMechanism::Median);
        let v = check_spf(&med, Variant::Deterministic, &dom).unwrap();
        assert!(v.failed());
        assert!(verify_witness(&med, AxiomId::new(Axiom::Spf, Variant::Deterministic), v.witness.as_ref().unwrap())
            .unwrap());
        // (0, 1/2, 1), S = {agent at 1}: distance 1/2 within 2/3
        let x = Profile::unit(vec![q(0, 1), q(1, 2), q(1, 1)]).unwrap();
        assert!(med.expected_distance(&x, &q(1, 1)).unwrap() <= q(2, 3));
        let capped = check_spf(&rr, Variant::InExpectation, &CheckDomain::unit(3, 2).with_subset_cap(1)).unwrap();
        assert!(capped.partial_coverage);
    }

    /// Reading "a set of agents at the same location" as any such subset
    /// gives the same verdicts as the maximal groups.
    #[test]
    fn subset_reading_agrees_with_maximal_groups() {
        let dom = CheckDomain::unit(3, 4);
        let mechanisms: Vec<Mechanism> = vec![
            det(DeterministicMechanism::Median),
            det(DeterministicMechanism::UniformPhantom),
            det(DeterministicMechanism::RankK(1)),
            random_rank(3, Domain::UnitInterval).unwrap().into(),
            random_dictator(3, Domain::UnitInterval).unwrap().into(),
            average_or_random_rank(q(1, 2), 3, Domain::UnitInterval).unwrap().into(),
            random_phantom(3, Domain::UnitInterval).unwrap().into(),
            RandomizedMechanism::degenerate(DeterministicMechanism::RankK(3), 3, Domain::UnitInterval)
                .unwrap()
                .into(),
        ];
        for m in &mechanisms {
            let variant = if m.is_deterministic() { Variant::Deterministic } else { Variant::InExpectation };
            let maximal = check_strong_proportionality(m, variant, &dom).unwrap().passed();
            let any_subset = two_valued_profiles(m, &CheckDomain { exhaustive: true, ..dom.clone() })
                .unwrap()
                .iter()
                .all(|x| {
                    let n = Rational::from(3);
                    subsets(3, 3).all(|s| {
                        let at = x.location(s[0]);
                        if s.iter().any(|&i| x.location(i) != at) {
                            return true;
                        }
                        let bound = (n - Rational::from(s.len())) / n * x.range();
                        m.expected_distance(x, &at).unwrap() <= bound
                    })
                });
            assert_eq!(maximal, any_subset, "{m}");
        }
    }
}
