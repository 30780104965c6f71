use super::{
    check_components, ensure_applicable, scan, verdict_from_scan, Axiom, AxiomId, AxiomVerdict,
    CheckDomain, Finding, Variant, Violation, Witness,
};
use crate::error::Result;
use crate::mechanism::Mechanism;

/// Compares (expected) locations across adjacent transpositions of every
/// labelled grid profile; transpositions generate all permutations.
pub fn check_anonymity(m: &Mechanism, variant: Variant, dom: &CheckDomain) -> Result<AxiomVerdict> {
    let id = AxiomId::new(Axiom::Anonymity, variant);
    ensure_applicable(m, id, dom)?;
    if variant == Variant::Universal {
        return check_components(m, id, dom, |c| {
            check_anonymity(c, Variant::Deterministic, dom)
        });
    }
    let space = dom.profiles(false)?;
    let found = scan(space.len(), |i| space.get(i), |x| {
        let base = m.expected_location(x)?;
        for j in 0..x.n() - 1 {
            if x.location(j) == x.location(j + 1) {
                continue;
            }
            let mut sigma: Vec<usize> = (0..x.n()).collect();
            sigma.swap(j, j + 1);
            let swapped = m.expected_location(&x.permuted(&sigma))?;
            if swapped != base {
                let mut w = Witness::new(x.clone(), swapped, base, Violation::Differs);
                w.permutation = Some(sigma.iter().map(|i| i + 1).collect());
                return Ok(Some(Finding::Fail(w)));
            }
        }
        Ok(None)
    })?;
    Ok(verdict_from_scan(id, found, space.len(), true))
}
