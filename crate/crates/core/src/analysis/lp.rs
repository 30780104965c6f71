//! Exact linear feasibility and optimization over nonnegative variables.
//!
//! Dense two-phase simplex with Bland's rule on rationals. Infeasible systems
//! come back with a Farkas certificate that can be checked independently.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// `coefficients · x  relation  rhs`, with the instances that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub coefficients: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
    pub provenance: Vec<String>,
}

impl Constraint {
    pub fn new(
        coefficients: Vec<Rational>,
        relation: Relation,
        rhs: Rational,
        provenance: impl Into<String>,
    ) -> Self {
        Constraint {
            coefficients,
            relation,
            rhs,
            provenance: vec![provenance.into()],
        }
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coefficients.iter().zip(x).map(|(a, v)| *a * *v).sum()
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }

    /// Scaled so the first nonzero coefficient is ±1. Positive scaling keeps
    /// the relation, so equal normalized rows describe the same half-space.
    pub fn normalized(&self) -> Constraint {
        let lead = self.coefficients.iter().find(|c| !c.is_zero()).map(|c| c.abs());
        match lead {
            Some(s) if s != Rational::ONE => Constraint {
                coefficients: self.coefficients.iter().map(|c| *c / s).collect(),
                relation: self.relation,
                rhs: self.rhs / s,
                provenance: self.provenance.clone(),
            },
            _ => self.clone(),
        }
    }
}

/// A system over named variables, all constrained to be nonnegative.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    pub variables: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn new(variables: Vec<String>) -> Self {
        ConstraintSystem {
            variables,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, c: Constraint) -> Result<()> {
        if c.coefficients.len() != self.variables.len() {
            return Err(Error::Analysis(format!(
                "constraint has {} coefficients for {} variables",
                c.coefficients.len(),
                self.variables.len()
            )));
        }
        self.constraints.push(c);
        Ok(())
    }

    /// Normalizes every row and merges duplicates, concatenating provenance.
    /// Rows with no nonzero coefficient that hold trivially are dropped.
    pub fn deduplicated(&self) -> ConstraintSystem {
        let mut out: Vec<Constraint> = Vec::new();
        for c in &self.constraints {
            let c = c.normalized();
            if c.coefficients.iter().all(|a| a.is_zero()) && c.is_satisfied_by(&[]) {
                continue;
            }
            match out.iter_mut().find(|o| {
                o.coefficients == c.coefficients && o.relation == c.relation && o.rhs == c.rhs
            }) {
                Some(o) => o.provenance.extend(c.provenance),
                None => out.push(c),
            }
        }
        ConstraintSystem {
            variables: self.variables.clone(),
            constraints: out,
        }
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.variables.len()
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| c.is_satisfied_by(x))
    }
}

/// Multipliers `λ` (one per constraint) with `λ ≥ 0` on `≤` rows, `λ ≤ 0` on
/// `≥` rows, `λᵀA ≥ 0` and `λᵀb < 0`. For any `x ≥ 0` satisfying the system
/// `0 ≤ λᵀAx ≤ λᵀb < 0`, a contradiction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rational>,
}

impl FarkasCertificate {
    pub fn verify(&self, system: &ConstraintSystem) -> bool {
        if self.multipliers.len() != system.constraints.len() {
            return false;
        }
        let signs_ok = self
            .multipliers
            .iter()
            .zip(&system.constraints)
            .all(|(l, c)| match c.relation {
                Relation::Le => !l.is_negative(),
                Relation::Ge => !l.is_positive(),
                Relation::Eq => true,
            });
        let combined_ok = (0..system.variables.len()).all(|j| {
            let s: Rational = self
                .multipliers
                .iter()
                .zip(&system.constraints)
                .map(|(l, c)| *l * c.coefficients[j])
                .sum();
            !s.is_negative()
        });
        let rhs: Rational = self
            .multipliers
            .iter()
            .zip(&system.constraints)
            .map(|(l, c)| *l * c.rhs)
            .sum();
        signs_ok && combined_ok && rhs.is_negative()
    }

    /// Constraints with a nonzero multiplier.
    pub fn support(&self) -> Vec<usize> {
        self.multipliers
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.is_zero())
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Unbounded,
    Infeasible(FarkasCertificate),
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v = *v / p;
        }
        self.rhs[r] = self.rhs[r] / p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f.is_zero() {
                continue;
            }
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= f * *pv;
                }
            }
            self.rhs[i] -= f * pivot_rhs;
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(&self.rows[i]) {
                *dj -= cb * *a;
            }
        }
        d
    }

    /// Minimizes `cost` over columns `< active`; `false` when unbounded.
    fn optimize(&mut self, cost: &[Rational], active: usize) -> bool {
        loop {
            let d = self.reduced_costs(cost);
            let entering = (0..active).find(|&j| d[j].is_negative() && !self.basis.contains(&j));
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a.is_positive() {
                    let ratio = self.rhs[i] / a;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best || (ratio == best && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Minimizes `objective · x` over the system (variables `x ≥ 0`).
pub fn minimize(system: &ConstraintSystem, objective: &[Rational]) -> Result<LpOutcome> {
    let nv = system.variables.len();
    if objective.len() != nv {
        return Err(Error::Analysis("objective length mismatch".into()));
    }
    let m = system.constraints.len();
    // columns: variables | one slack per inequality | one artificial per row
    let slack_of: Vec<Option<usize>> = {
        let mut next = nv;
        system
            .constraints
            .iter()
            .map(|c| {
                (c.relation != Relation::Eq).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let n_slack = slack_of.iter().flatten().count();
    let art0 = nv + n_slack;
    let ncols = art0 + m;
    let mut sign = vec![Rational::ONE; m];
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, c) in system.constraints.iter().enumerate() {
        let mut row = vec![Rational::ZERO; ncols];
        row[..nv].copy_from_slice(&c.coefficients);
        if let Some(s) = slack_of[i] {
            row[s] = if c.relation == Relation::Le {
                Rational::ONE
            } else {
                -Rational::ONE
            };
        }
        let mut b = c.rhs;
        if b.is_negative() {
            sign[i] = -Rational::ONE;
            for v in row.iter_mut() {
                *v = -*v;
            }
            b = -b;
        }
        row[art0 + i] = Rational::ONE;
        rows.push(row);
        rhs.push(b);
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: (art0..ncols).collect(),
    };

    let mut phase1 = vec![Rational::ZERO; ncols];
    for c in phase1.iter_mut().skip(art0) {
        *c = Rational::ONE;
    }
    t.optimize(&phase1, ncols);
    let infeasibility: Rational = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(b, _)| **b >= art0)
        .map(|(_, v)| *v)
        .sum();
    if infeasibility.is_positive() {
        // dual of phase I: y_j = 1 − (reduced cost of artificial j)
        let d = t.reduced_costs(&phase1);
        let multipliers = (0..m)
            .map(|i| -(sign[i] * (Rational::ONE - d[art0 + i])))
            .collect();
        let cert = FarkasCertificate { multipliers };
        if !cert.verify(system) {
            return Err(Error::Analysis("phase I produced an invalid certificate".into()));
        }
        return Ok(LpOutcome::Infeasible(cert));
    }

    // drive zero-level artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= art0 {
            match (0..art0).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    let mut phase2 = vec![Rational::ZERO; ncols];
    phase2[..nv].copy_from_slice(objective);
    if !t.optimize(&phase2, art0) {
        return Ok(LpOutcome::Unbounded);
    }
    let mut point = vec![Rational::ZERO; nv];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < nv {
            point[b] = t.rhs[r];
        }
    }
    let value = objective.iter().zip(&point).map(|(c, x)| *c * *x).sum();
    Ok(LpOutcome::Optimal { value, point })
}

/// A feasible point, or a certificate that none exists.
pub fn feasible_point(
    system: &ConstraintSystem,
) -> Result<std::result::Result<Vec<Rational>, FarkasCertificate>> {
    let zero = vec![Rational::ZERO; system.variables.len()];
    Ok(match minimize(system, &zero)? {
        LpOutcome::Optimal { point, .. } => Ok(point),
        LpOutcome::Infeasible(cert) => Err(cert),
        LpOutcome::Unbounded => unreachable!("zero objective is bounded"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn system(rows: Vec<(Vec<i128>, Relation, i128)>, vars: usize) -> ConstraintSystem {
        let mut s = ConstraintSystem::new((0..vars).map(|i| format!("x{i}")).collect());
        for (i, (a, r, b)) in rows.into_iter().enumerate() {
            s.push(Constraint::new(
                a.into_iter().map(Rational::from_integer).collect(),
                r,
                Rational::from_integer(b),
                format!("row {i}"),
            ))
            .unwrap();
        }
        s
    }

    #[test]
    fn small_optimum() {
        // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6  ->  (8/5, 6/5)
        let s = system(
            vec![(vec![1, 2], Relation::Le, 4), (vec![3, 1], Relation::Le, 6)],
            2,
        );
        let out = minimize(&s, &[q(-1, 1), q(-1, 1)]).unwrap();
        assert_eq!(
            out,
            LpOutcome::Optimal {
                value: q(-14, 5),
                point: vec![q(8, 5), q(6, 5)]
            }
        );
    }

    #[test]
    fn equality_and_ge_rows() {
        let s = system(
            vec![(vec![1, 1], Relation::Eq, 1), (vec![1, 0], Relation::Ge, 1)],
            2,
        );
        let p = feasible_point(&s).unwrap().unwrap();
        assert_eq!(p, vec![q(1, 1), q(0, 1)]);
    }

    #[test]
    fn infeasible_with_certificate() {
        let s = system(
            vec![(vec![1, 1], Relation::Eq, 1), (vec![1, 1], Relation::Ge, 2)],
            2,
        );
        let cert = feasible_point(&s).unwrap().unwrap_err();
        assert!(cert.verify(&s));
        let s = system(vec![(vec![1], Relation::Le, -1)], 1);
        let cert = feasible_point(&s).unwrap().unwrap_err();
        assert!(cert.verify(&s));
        assert!(!FarkasCertificate { multipliers: vec![q(-1, 1)] }.verify(&s));
    }

    #[test]
    fn unbounded() {
        let s = system(vec![(vec![1, -1], Relation::Le, 1)], 2);
        assert_eq!(minimize(&s, &[q(0, 1), q(-1, 1)]).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let s = system(
            vec![
                (vec![1, 1, 1], Relation::Eq, 1),
                (vec![2, 2, 2], Relation::Eq, 2),
                (vec![1, 0, 0], Relation::Le, 0),
            ],
            3,
        );
        let out = minimize(&s, &[q(0, 1), q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(
            out,
            LpOutcome::Optimal {
                value: q(0, 1),
                point: vec![q(0, 1), q(0, 1), q(1, 1)]
            }
        );
    }

    #[test]
    fn dedup_merges_provenance() {
        let mut s = ConstraintSystem::new(vec!["a".into(), "b".into()]);
        s.push(Constraint::new(vec![q(2, 1), q(0, 1)], Relation::Le, q(1, 1), "first"))
            .unwrap();
        s.push(Constraint::new(vec![q(1, 3), q(0, 1)], Relation::Le, q(1, 6), "second"))
            .unwrap();
        s.push(Constraint::new(vec![q(0, 1), q(0, 1)], Relation::Le, q(1, 6), "trivial"))
            .unwrap();
        let d = s.deduplicated();
        assert_eq!(d.constraints.len(), 1);
        assert_eq!(d.constraints[0].rhs, q(1, 2));
        assert_eq!(d.constraints[0].provenance, vec!["first", "second"]);
    }

    proptest! {
        /// Either the returned point satisfies the system, or the certificate
        /// verifies and no grid point satisfies it.
        #[test]
        fn outcomes_are_sound(
            rows in proptest::collection::vec(
                (proptest::collection::vec(-3i128..=3, 2), 0usize..3, -4i128..=4), 1..5)
        ) {
            let rel = [Relation::Le, Relation::Eq, Relation::Ge];
            let s = system(rows.into_iter().map(|(a, r, b)| (a, rel[r], b)).collect(), 2);
            match feasible_point(&s).unwrap() {
                Ok(p) => prop_assert!(s.is_satisfied_by(&p)),
                Err(cert) => {
                    prop_assert!(cert.verify(&s));
                    for a in 0..=16 {
                        for b in 0..=16 {
                            prop_assert!(!s.is_satisfied_by(&[q(a, 4), q(b, 4)]));
                        }
                    }
                }
            }
        }
    }
}
