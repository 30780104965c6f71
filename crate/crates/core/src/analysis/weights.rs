//! Which mixtures of rank mechanisms are strongly proportional in expectation?
//!
//! Unknowns are the weights `w_1..w_n` on `RankK(1..n)`. Each two-valued
//! profile `(α,…,α,β,…,β)` on the grid contributes one constraint per group,
//! built by evaluating the ranks on that profile. Rows are normalized and
//! deduplicated so that each distinct half-space appears once.

use serde::Serialize;

use crate::analysis::lp::{
    feasible_point, minimize, Constraint, ConstraintSystem, FarkasCertificate, LpOutcome, Relation,
};
use crate::error::{Error, Result};
use crate::location::Domain;
use crate::mechanism::{DeterministicMechanism, RandomizedMechanism};
use crate::profile::Profile;
use crate::rational::Rational;

/// Grid resolution used by [`solve_rank_weights`].
pub const DEFAULT_WEIGHT_GRID: i128 = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum WeightSolution {
    Unique {
        weights: Vec<Rational>,
    },
    NonUnique {
        variable: usize,
        min: Rational,
        max: Rational,
        low_point: Vec<Rational>,
        high_point: Vec<Rational>,
    },
    Infeasible {
        certificate: FarkasCertificate,
    },
}

impl WeightSolution {
    pub fn is_uniform_unique(&self, n: usize) -> bool {
        matches!(self, WeightSolution::Unique { weights }
            if weights.iter().all(|w| *w == Rational::new(1, n as i128)))
    }
}

fn grid_points(domain: Domain, grid: i128, window: i128) -> Vec<Rational> {
    match domain {
        Domain::UnitInterval => (0..=grid).map(|k| Rational::new(k, grid)).collect(),
        Domain::RealLine => (-window * grid..=window * grid)
            .map(|k| Rational::new(k, grid))
            .collect(),
    }
}

/// Constraint system over `w_1..w_n` (deduplicated), including `Σ w = 1`.
pub fn rank_weight_system(n: usize, domain: Domain, grid: i128) -> Result<ConstraintSystem> {
    if n < 2 {
        return Err(Error::TooFewAgents(n));
    }
    if grid < 1 {
        return Err(Error::Analysis(format!("grid resolution {grid} must be positive")));
    }
    let mut system = ConstraintSystem::new((1..=n).map(|k| format!("w{k}")).collect());
    system.push(Constraint::new(
        vec![Rational::ONE; n],
        Relation::Eq,
        Rational::ONE,
        "weights sum to one",
    ))?;
    let points = grid_points(domain, grid, 1);
    let nn = Rational::from(n);
    for (ia, alpha) in points.iter().enumerate() {
        for beta in &points[ia + 1..] {
            for low in 1..n {
                let mut xs = vec![*alpha; low];
                xs.extend(vec![*beta; n - low]);
                let x = Profile::new(domain, xs)?;
                let outcomes = (1..=n)
                    .map(|k| DeterministicMechanism::RankK(k).evaluate(&x))
                    .collect::<Result<Vec<_>>>()?;
                let gap = *beta - *alpha;
                for (at, others) in [(*alpha, n - low), (*beta, low)] {
                    let coefficients = outcomes.iter().map(|y| y.abs_diff(&at)).collect();
                    system.push(Constraint::new(
                        coefficients,
                        Relation::Le,
                        Rational::from(others) / nn * gap,
                        format!("group at {at} in {x}"),
                    ))?;
                }
            }
        }
    }
    Ok(system.deduplicated())
}

/// Decides whether `system` pins every variable: infeasible, a unique point,
/// or a variable with two distinct attainable values.
pub fn solve_weight_system(system: &ConstraintSystem) -> Result<WeightSolution> {
    let point = match feasible_point(system)? {
        Ok(p) => p,
        Err(certificate) => return Ok(WeightSolution::Infeasible { certificate }),
    };
    let nv = system.variables.len();
    for v in 0..nv {
        let mut objective = vec![Rational::ZERO; nv];
        objective[v] = Rational::ONE;
        let low = optimum(system, &objective)?;
        objective[v] = -Rational::ONE;
        let high = optimum(system, &objective)?;
        if low.0 != -high.0 {
            return Ok(WeightSolution::NonUnique {
                variable: v,
                min: low.0,
                max: -high.0,
                low_point: low.1,
                high_point: high.1,
            });
        }
    }
    Ok(WeightSolution::Unique { weights: point })
}

fn optimum(system: &ConstraintSystem, objective: &[Rational]) -> Result<(Rational, Vec<Rational>)> {
    match minimize(system, objective)? {
        LpOutcome::Optimal { value, point } => Ok((value, point)),
        // variables are weights bounded by the sum constraint
        other => Err(Error::Analysis(format!("unexpected LP outcome {other:?}"))),
    }
}

/// Solves the rank-weight system at the default grid resolution.
pub fn solve_rank_weights(n: usize, domain: Domain) -> Result<WeightSolution> {
    solve_weight_system(&rank_weight_system(n, domain, DEFAULT_WEIGHT_GRID)?)
}

/// The mixture with the given rank weights.
pub fn rank_mixture(weights: &[Rational], domain: Domain) -> Result<RandomizedMechanism> {
    let components = weights
        .iter()
        .enumerate()
        .map(|(i, w)| (DeterministicMechanism::RankK(i + 1), *w))
        .collect();
    RandomizedMechanism::new("rank_mixture", weights.len(), domain, components, None)
}
