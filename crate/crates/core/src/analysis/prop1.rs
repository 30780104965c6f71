//! No anonymous strategyproof deterministic rule for two agents is strongly
//! proportional.
//!
//! Such rules are `Phantom(y1, y2, y3)`. Strong proportionality on the
//! profile `(0, t)` forces the output `t/2`. Each forced output becomes
//! bounds on the sorted phantoms; the bounds are propagated along
//! `y1 ≤ y2 ≤ y3` and a crossing lower/upper pair certifies infeasibility.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::location::Domain;
use crate::mechanism::DeterministicMechanism;
use crate::profile::Profile;
use crate::rational::Rational;

const AGENTS: usize = 2;
const PHANTOMS: usize = AGENTS + 1;

/// Profile `(0, t)` and the output strong proportionality forces on it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForcedOutput {
    pub sample: Rational,
    pub profile: Profile,
    pub output: Rational,
}

/// A bound on the `phantom`-th smallest phantom (1-based) and its origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhantomBound {
    pub phantom: usize,
    pub value: Rational,
    pub from_sample: Rational,
}

/// The misreport that a forced pair invites: on `profile`, the agent at
/// `sample` reports `report` and moves the facility closer to itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ManipulationNote {
    pub profile: Profile,
    pub agent: usize,
    pub report: Rational,
    pub truthful_cost: Rational,
    pub misreport_cost: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prop1Certificate {
    pub forced: Vec<ForcedOutput>,
    /// A lower bound exceeding an upper bound on the same phantom once both
    /// are propagated through the sorted order.
    pub lower: PhantomBound,
    pub upper: PhantomBound,
    pub manipulation: Option<ManipulationNote>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Prop1Outcome {
    Infeasible { certificate: Box<Prop1Certificate> },
    /// Sorted phantoms meeting every forced output.
    Satisfiable { phantoms: Vec<Rational> },
}

pub fn forced_output(t: Rational) -> Result<ForcedOutput> {
    if !t.is_positive() || t > Rational::ONE {
        return Err(Error::Analysis(format!("sample {t} must lie in (0, 1]")));
    }
    Ok(ForcedOutput {
        sample: t,
        profile: Profile::unit(vec![Rational::ZERO, t])?,
        output: t / Rational::from(AGENTS),
    })
}

/// `v` is the median of agents plus phantoms iff at least `n + 1` values are
/// `≤ v` and at least `n + 1` are `≥ v`.
fn bounds_for(forced: &ForcedOutput) -> (Option<usize>, Option<usize>) {
    let v = forced.output;
    let xs = forced.profile.locations();
    let need = AGENTS + 1;
    let le = xs.iter().filter(|x| **x <= v).count();
    let ge = xs.iter().filter(|x| **x >= v).count();
    // the `need − le` smallest phantoms must be ≤ v
    let upper = (need > le).then(|| need - le);
    // the `need − ge` largest phantoms must be ≥ v
    let lower = (need > ge).then(|| PHANTOMS - (need - ge) + 1);
    (upper, lower)
}

pub fn prop1_infeasibility(samples: &[Rational]) -> Result<Prop1Outcome> {
    if samples.is_empty() {
        return Err(Error::Analysis("at least one sample is required".into()));
    }
    let forced = samples
        .iter()
        .map(|t| forced_output(*t))
        .collect::<Result<Vec<_>>>()?;
    let mut lower: Vec<Option<PhantomBound>> = vec![None; PHANTOMS];
    let mut upper: Vec<Option<PhantomBound>> = vec![None; PHANTOMS];
    for f in &forced {
        let (up, lo) = bounds_for(f);
        // y_(up) ≤ v propagates down the order, y_(lo) ≥ v propagates up
        if let Some(up) = up {
            for slot in upper.iter_mut().take(up) {
                if slot.as_ref().is_none_or(|b| f.output < b.value) {
                    *slot = Some(PhantomBound { phantom: up, value: f.output, from_sample: f.sample });
                }
            }
        }
        if let Some(lo) = lo {
            for slot in lower.iter_mut().skip(lo - 1) {
                if slot.as_ref().is_none_or(|b| f.output > b.value) {
                    *slot = Some(PhantomBound { phantom: lo, value: f.output, from_sample: f.sample });
                }
            }
        }
    }
    for i in 0..PHANTOMS {
        if let (Some(lo), Some(up)) = (&lower[i], &upper[i]) {
            if lo.value > up.value {
                let manipulation = manipulation_note(up.from_sample, lo.from_sample)?;
                let mut pair: Vec<ForcedOutput> = forced
                    .iter()
                    .filter(|f| f.sample == lo.from_sample || f.sample == up.from_sample)
                    .cloned()
                    .collect();
                pair.dedup_by(|a, b| a.sample == b.sample);
                return Ok(Prop1Outcome::Infeasible {
                    certificate: Box::new(Prop1Certificate {
                        forced: pair,
                        lower: PhantomBound { phantom: i + 1, ..lo.clone() },
                        upper: PhantomBound { phantom: i + 1, ..up.clone() },
                        manipulation,
                    }),
                });
            }
        }
    }
    let phantoms = (0..PHANTOMS)
        .map(|i| lower[i].as_ref().map_or(Rational::ZERO, |b| b.value))
        .collect::<Vec<_>>();
    debug_assert!(forced.iter().all(|f| satisfies(&phantoms, f)));
    Ok(Prop1Outcome::Satisfiable { phantoms })
}

/// On `(0, small)` the agent at `small` reports `large`; kept only when it
/// strictly helps.
fn manipulation_note(small: Rational, large: Rational) -> Result<Option<ManipulationNote>> {
    let (small, large) = (small.min(large), small.max(large));
    let profile = Profile::unit(vec![Rational::ZERO, small])?;
    let truthful_cost = (small / Rational::from(AGENTS)).abs_diff(&small);
    let misreport_cost = (large / Rational::from(AGENTS)).abs_diff(&small);
    Ok((misreport_cost < truthful_cost).then_some(ManipulationNote {
        profile,
        agent: 2,
        report: large,
        truthful_cost,
        misreport_cost,
    }))
}

fn satisfies(phantoms: &[Rational], forced: &ForcedOutput) -> bool {
    DeterministicMechanism::phantom_at(phantoms)
        .and_then(|m| m.evaluate(&forced.profile)) == Ok(forced.output)
}

/// Every sorted phantom triple on the grid `{k/m}` meeting all forced outputs.
pub fn prop1_grid_sweep(samples: &[Rational], grid: i128) -> Result<Vec<Vec<Rational>>> {
    let forced = samples
        .iter()
        .map(|t| forced_output(*t))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<Rational> = (0..=grid).map(|k| Rational::new(k, grid)).collect();
    let mut found = Vec::new();
    for (a, y1) in points.iter().enumerate() {
        for (b, y2) in points.iter().enumerate().skip(a) {
            for y3 in &points[b..] {
                let ys = [*y1, *y2, *y3];
                if forced.iter().all(|f| satisfies(&ys, f)) {
                    found.push(ys.to_vec());
                }
            }
        }
    }
    debug_assert!(found.iter().all(|ys| ys.iter().all(|y| Domain::UnitInterval.contains(y))));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn half_and_one_are_infeasible() {
        match prop1_infeasibility(&[q(1, 2), q(1, 1)]).unwrap() {
            Prop1Outcome::Infeasible { certificate } => {
                assert_eq!(certificate.forced.len(), 2);
                assert_eq!(certificate.forced[0].output, q(1, 4));
                assert_eq!(certificate.forced[1].output, q(1, 2));
                assert!(certificate.lower.value > certificate.upper.value);
                let note = certificate.manipulation.unwrap();
                assert_eq!(note.report, q(1, 1));
                assert_eq!(note.truthful_cost, q(1, 4));
                assert_eq!(note.misreport_cost, q(0, 1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn thirds_are_infeasible_and_grid_agrees() {
        assert!(matches!(
            prop1_infeasibility(&[q(1, 3), q(2, 3)]).unwrap(),
            Prop1Outcome::Infeasible { .. }
        ));
        assert!(prop1_grid_sweep(&[q(1, 3), q(2, 3)], 24).unwrap().is_empty());
    }

    #[test]
    fn single_sample_is_satisfiable() {
        match prop1_infeasibility(&[q(1, 2)]).unwrap() {
            Prop1Outcome::Satisfiable { phantoms } => {
                let f = forced_output(q(1, 2)).unwrap();
                assert!(satisfies(&phantoms, &f));
                assert!(satisfies(&[q(1, 4), q(1, 4), q(1, 4)], &f));
            }
            other => panic!("{other:?}"),
        }
        assert!(!prop1_grid_sweep(&[q(1, 2)], 40).unwrap().is_empty());
        assert!(prop1_infeasibility(&[]).is_err());
        assert!(prop1_infeasibility(&[q(0, 1)]).is_err());
    }

    #[test]
    fn decision_matches_grid_sweep() {
        let grid = 12;
        for a in 1..=grid {
            for b in a..=grid {
                let samples = [q(a, grid), q(b, grid)];
                let decided = prop1_infeasibility(&samples).unwrap();
                let sweep = prop1_grid_sweep(&samples, 2 * grid).unwrap();
                match decided {
                    Prop1Outcome::Infeasible { .. } => assert!(sweep.is_empty()),
                    Prop1Outcome::Satisfiable { phantoms } => {
                        assert_eq!(a, b);
                        assert!(sweep.contains(&phantoms));
                    }
                }
            }
        }
    }
}
