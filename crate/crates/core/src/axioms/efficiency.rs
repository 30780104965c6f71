use super::{
    check_components, ensure_applicable, scan, sorted_only, verdict_from_scan, Axiom, AxiomId,
    AxiomVerdict, CheckDomain, Finding, Variant, Violation, Witness,
};
use crate::error::Result;
use crate::mechanism::Mechanism;

/// Pareto efficiency (`f(x) ∈ [min x, max x]` on every grid profile) for a
/// deterministic mechanism, or ex-post efficiency (every component Pareto
/// efficient) for a mixture.
pub fn check_efficiency(m: &Mechanism, id: AxiomId, dom: &CheckDomain) -> Result<AxiomVerdict> {
    ensure_applicable(m, id, dom)?;
    if id.axiom == Axiom::ExPostEfficiency {
        let inner = AxiomId::new(Axiom::ParetoEfficiency, Variant::Deterministic);
        return check_components(m, id, dom, |c| check_efficiency(c, inner, dom));
    }
    let space = dom.profiles(sorted_only(m, dom))?;
    let found = scan(space.len(), |i| space.get(i), |x| {
        let y = m.expected_location(x)?;
        let w = if y < x.min() {
            Witness::new(x.clone(), y, x.min(), Violation::Below)
        } else if y > x.max() {
            Witness::new(x.clone(), y, x.max(), Violation::Above)
        } else {
            return Ok(None);
        };
        Ok(Some(Finding::Fail(w)))
    })?;
    Ok(verdict_from_scan(id, found, space.len(), true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::verify_witness;
    use crate::location::Domain;
    use crate::mechanism::DeterministicMechanism;
    use crate::mechanisms::{average_or_random_rank, random_phantom, random_rank};
    use crate::rational::q;

    fn pareto() -> AxiomId {
        AxiomId::new(Axiom::ParetoEfficiency, Variant::Deterministic)
    }

    #[test]
    fn ranks_are_efficient() {
        for k in 1..=3 {
            let m = Mechanism::Deterministic(DeterministicMechanism::RankK(k));
            assert!(check_efficiency(&m, pareto(), &CheckDomain::unit(3, 4)).unwrap().passed());
            assert!(check_efficiency(&m, pareto(), &CheckDomain::real(3, 1, 3)).unwrap().passed());
        }
    }

    #[test]
    fn constant_phantom_is_not() {
        let m = Mechanism::Deterministic(
            DeterministicMechanism::phantom_at(&[q(1, 2), q(1, 2), q(1, 2)]).unwrap(),
        );
        let v = check_efficiency(&m, pareto(), &CheckDomain::unit(2, 2)).unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.profile.locations(), &[q(0, 1), q(0, 1)]);
        assert_eq!((w.lhs, w.bound, w.relation), (q(1, 2), q(0, 1), Violation::Above));
        assert!(verify_witness(&m, pareto(), &w).unwrap());
    }

    #[test]
    fn ex_post() {
        let id = AxiomId::new(Axiom::ExPostEfficiency, Variant::Universal);
        let dom = CheckDomain::unit(3, 4);
        for m in [
            random_rank(3, Domain::UnitInterval).unwrap(),
            average_or_random_rank(q(1, 2), 3, Domain::UnitInterval).unwrap(),
            random_phantom(3, Domain::UnitInterval).unwrap(),
        ] {
            assert!(check_efficiency(&m.into(), id, &dom).unwrap().passed());
        }
    }
}
