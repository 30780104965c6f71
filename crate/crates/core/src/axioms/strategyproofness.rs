use super::{
    check_components, ensure_applicable, scan, sorted_only, verdict_from_scan, Axiom, AxiomId,
    AxiomVerdict, CheckDomain, Finding, Misreport, Variant, Violation, Witness,
};
use crate::error::Result;
use crate::location::Domain;
use crate::mechanism::Mechanism;
use crate::profile::Profile;
use crate::rational::Rational;

/// Misreports worth trying for `agent` at `x`.
///
/// For finite mixtures of phantom and average rules the expected cost is
/// piecewise linear in the report, with breakpoints among the other reports,
/// the phantom values, the agent's own location and the point where the mean
/// report crosses it. Evaluating the breakpoints, the grid, and the midpoints
/// between consecutive candidates covers every linear piece.
pub fn critical_reports(m: &Mechanism, x: &Profile, agent: usize, dom: &CheckDomain) -> Vec<Rational> {
    let phantoms = m.phantom_values(x.n(), x.domain());
    critical_with(m, x, agent, dom, &phantoms)
}

fn critical_with(
    m: &Mechanism,
    x: &Profile,
    agent: usize,
    dom: &CheckDomain,
    phantoms: &[Rational],
) -> Vec<Rational> {
    let own = x.location(agent);
    let mut base = dom.grid_points();
    base.extend_from_slice(x.locations());
    base.extend_from_slice(phantoms);
    if m.has_average() {
        let others: Rational = x
            .locations()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != agent)
            .map(|(_, v)| *v)
            .sum();
        base.push(Rational::from(x.n()) * own - others);
    }
    if x.domain() == Domain::RealLine {
        base.push(x.min() - Rational::ONE);
        base.push(x.max() + Rational::ONE);
    }
    base.retain(|r| x.domain().contains(r));
    base.sort();
    base.dedup();
    let mids: Vec<Rational> = base.windows(2).map(|w| w[0].midpoint(&w[1])).collect();
    base.extend(mids);
    base.sort();
    base.dedup();
    base
}

/// Checks every grid profile, agent and critical misreport, comparing the
/// (expected) distance of the truthful and misreported outcomes.
pub fn check_strategyproofness(m: &Mechanism, variant: Variant, dom: &CheckDomain) -> Result<AxiomVerdict> {
    let phantoms = m.phantom_values(dom.n, dom.domain);
    check_with(m, variant, dom, &|x, agent| critical_with(m, x, agent, dom, &phantoms))
}

/// Same check with misreports drawn from the grid `{k/dense}` only.
pub fn check_strategyproofness_dense(
    m: &Mechanism,
    variant: Variant,
    dom: &CheckDomain,
    dense: i128,
) -> Result<AxiomVerdict> {
    let reports: Vec<Rational> = CheckDomain { grid: dense, ..dom.clone() }.grid_points();
    check_with(m, variant, dom, &|_, _| reports.clone())
}

fn check_with(
    m: &Mechanism,
    variant: Variant,
    dom: &CheckDomain,
    reports: &(dyn Fn(&Profile, usize) -> Vec<Rational> + Sync),
) -> Result<AxiomVerdict> {
    let id = AxiomId::new(Axiom::Strategyproofness, variant);
    ensure_applicable(m, id, dom)?;
    if variant == Variant::Universal {
        return check_components(m, id, dom, |c| {
            let phantoms = c.phantom_values(dom.n, dom.domain);
            let inner = |x: &Profile, agent: usize| critical_with(c, x, agent, dom, &phantoms);
            check_with(c, Variant::Deterministic, dom, &inner)
        });
    }
    let sorted = sorted_only(m, dom);
    let space = dom.profiles(sorted)?;
    let found = scan(space.len(), |i| space.get(i), |x| {
        for agent in 0..x.n() {
            // anonymous mechanisms treat co-located agents alike
            if sorted && agent > 0 && x.location(agent - 1) == x.location(agent) {
                continue;
            }
            let own = x.location(agent);
            let truthful = m.expected_distance(x, &own)?;
            if truthful.is_zero() {
                continue;
            }
            // the most profitable misreport of the first manipulating agent
            let mut best: Option<(Rational, Rational)> = None;
            for r in reports(x, agent) {
                if r == own {
                    continue;
                }
                let lie = m.expected_distance(&x.with_report(agent, r), &own)?;
                if lie < truthful && best.is_none_or(|(_, b)| lie < b) {
                    best = Some((r, lie));
                }
            }
            if let Some((r, lie)) = best {
                let mut w = Witness::new(x.clone(), lie, truthful, Violation::Below);
                w.agent = Some(agent + 1);
                w.group = vec![agent + 1];
                w.misreport = Some(Misreport { agent: agent + 1, to: r });
                return Ok(Some(Finding::Fail(w)));
            }
        }
        Ok(None)
    })?;
    Ok(verdict_from_scan(id, found, space.len(), true))
}
