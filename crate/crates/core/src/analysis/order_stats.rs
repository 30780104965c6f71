//! Exact expectations for i.i.d. phantoms.
//!
//! With endpoint phantoms 0 and 1 and `n − 1` i.i.d. uniform interior
//! phantoms, `P(f(x) > t)` is a binomial tail in `1 − t` whose threshold only
//! changes at agent locations, so expectations are integrals of piecewise
//! polynomials and come out as exact rationals.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::location::Domain;
use crate::mechanism::PhantomDistribution;
use crate::profile::Profile;
use crate::rational::Rational;

/// Polynomial in one variable with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly(Vec<Rational>);

impl Poly {
    pub fn constant(c: Rational) -> Self {
        Poly(vec![c])
    }

    pub fn from_coefficients(coefficients: Vec<Rational>) -> Self {
        Poly(coefficients)
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.0
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::ZERO, |acc, c| acc * *t + *c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.0.len().max(other.0.len());
        let get = |p: &Poly, i: usize| p.0.get(i).copied().unwrap_or(Rational::ZERO);
        Poly((0..len).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly::default();
        }
        let mut out = vec![Rational::ZERO; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += *a * *b;
            }
        }
        Poly(out)
    }

    pub fn scale(&self, c: Rational) -> Poly {
        Poly(self.0.iter().map(|a| *a * c).collect())
    }

    fn antiderivative_at(&self, t: &Rational) -> Rational {
        let mut acc = Rational::ZERO;
        let mut power = *t;
        for (j, c) in self.0.iter().enumerate() {
            acc += *c * power / Rational::from(j + 1);
            power = power * *t;
        }
        acc
    }

    /// `∫_a^b p(t) dt`.
    pub fn integrate(&self, a: &Rational, b: &Rational) -> Rational {
        self.antiderivative_at(b) - self.antiderivative_at(a)
    }
}

fn binomial(n: usize, k: usize) -> i128 {
    let k = k.min(n - k);
    (0..k).fold(1i128, |acc, j| acc * (n - j) as i128 / (j + 1) as i128)
}

/// `tails[need] = P(Bin(draws, 1 − t) ≥ need)` as polynomials in `t`, for
/// `need = 0..=draws`.
fn compute_tails(draws: usize) -> Vec<Poly> {
    let t = Poly(vec![Rational::ZERO, Rational::ONE]);
    let one_minus_t = Poly(vec![Rational::ONE, -Rational::ONE]);
    let mut pow_t = vec![Poly::constant(Rational::ONE)];
    let mut pow_s = vec![Poly::constant(Rational::ONE)];
    for j in 1..=draws {
        pow_t.push(pow_t[j - 1].mul(&t));
        pow_s.push(pow_s[j - 1].mul(&one_minus_t));
    }
    let terms: Vec<Poly> = (0..=draws)
        .map(|j| {
            pow_s[j]
                .mul(&pow_t[draws - j])
                .scale(Rational::from_integer(binomial(draws, j)))
        })
        .collect();
    let mut tails = vec![Poly::default(); draws + 1];
    let mut acc = Poly::default();
    for need in (0..=draws).rev() {
        acc = acc.add(&terms[need]);
        tails[need] = acc.clone();
    }
    tails
}

thread_local! {
    static TAILS: RefCell<HashMap<usize, Rc<Vec<Poly>>>> = RefCell::new(HashMap::new());
}

fn tails(draws: usize) -> Rc<Vec<Poly>> {
    TAILS.with(|cache| {
        cache
            .borrow_mut()
            .entry(draws)
            .or_insert_with(|| Rc::new(compute_tails(draws)))
            .clone()
    })
}

/// Pieces `(a, b, P(f > t) on (a, b))` covering `[0, 1]`.
fn survival_pieces(x: &Profile) -> Result<Vec<(Rational, Rational, Poly)>> {
    if x.domain() != Domain::UnitInterval {
        return Err(Error::DomainMismatch(
            "uniform random phantoms live on [0, 1]".into(),
        ));
    }
    let n = x.n();
    let draws = n - 1;
    let table = tails(draws);
    let mut cuts: Vec<Rational> = x.locations().to_vec();
    cuts.push(Rational::ZERO);
    cuts.push(Rational::ONE);
    cuts.sort();
    cuts.dedup();
    let mut pieces = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        // f > t needs at least n − #{x_i > t} interior phantoms above t
        let above = x.locations().iter().filter(|v| **v >= b).count();
        let need = n - above;
        let g = if need > draws {
            Poly::default()
        } else {
            table[need].clone()
        };
        pieces.push((a, b, g));
    }
    Ok(pieces)
}

/// `E[f(x)]` for the i.i.d. uniform phantom family.
pub fn uniform_family_expected_location(x: &Profile) -> Result<Rational> {
    let pieces = survival_pieces(x)?;
    Ok(pieces.iter().map(|(a, b, g)| g.integrate(a, b)).sum())
}

/// `E[|f(x) − point|]` for the i.i.d. uniform phantom family.
pub fn uniform_family_expected_distance(x: &Profile, point: &Rational) -> Result<Rational> {
    let pieces = survival_pieces(x)?;
    if *point <= Rational::ZERO {
        let mean: Rational = pieces.iter().map(|(a, b, g)| g.integrate(a, b)).sum();
        return Ok(mean - *point);
    }
    if *point >= Rational::ONE {
        let mean: Rational = pieces.iter().map(|(a, b, g)| g.integrate(a, b)).sum();
        return Ok(*point - mean);
    }
    // E|f − p| = ∫_0^p P(f < t) dt + ∫_p^1 P(f > t) dt
    let one = Poly::constant(Rational::ONE);
    let mut total = Rational::ZERO;
    for (a, b, g) in &pieces {
        let below = one.add(&g.scale(-Rational::ONE));
        if *b <= *point {
            total += below.integrate(a, b);
        } else if *a >= *point {
            total += g.integrate(a, b);
        } else {
            total += below.integrate(a, point) + g.integrate(point, b);
        }
    }
    Ok(total)
}

/// The `index`-th smallest of `count` i.i.d. draws from `distribution`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderStatSpec {
    pub count: usize,
    pub distribution: PhantomDistribution,
    pub index: usize,
}

impl OrderStatSpec {
    /// The `index`-th of the `n − 1` interior uniform phantoms of an
    /// `n`-agent random phantom mechanism.
    pub fn interior_uniform(n: usize, index: usize) -> Self {
        OrderStatSpec {
            count: n.saturating_sub(1),
            distribution: PhantomDistribution::UniformOn01,
            index,
        }
    }
}

/// Mean of the `index`-th smallest of `n − 1` i.i.d. `U[0,1]` draws.
pub fn uniform_order_stat_mean(n: usize, index: usize) -> Result<Rational> {
    order_stat_mean(&OrderStatSpec::interior_uniform(n, index))
}

/// Exact `E[Y_(index)]`, via `∫_0^1 P(Y_(index) > t) dt`.
pub fn order_stat_mean(spec: &OrderStatSpec) -> Result<Rational> {
    let (count, index) = (spec.count, spec.index);
    if index == 0 || index > count {
        return Err(Error::RankIndex { k: index, n: count });
    }
    // Y_(i) > t  iff  at most i − 1 draws are ≤ t
    match &spec.distribution {
        PhantomDistribution::UniformOn01 => {
            // equivalently at least count − i + 1 draws exceed t
            let g = &tails(count)[count - index + 1];
            Ok(g.integrate(&Rational::ZERO, &Rational::ONE))
        }
        PhantomDistribution::DiscreteAtoms(atoms) => {
            let mut atoms = atoms.clone();
            atoms.sort();
            let mut cuts: Vec<Rational> = atoms.iter().map(|(x, _)| *x).collect();
            cuts.push(Rational::ZERO);
            cuts.push(Rational::ONE);
            cuts.sort();
            cuts.dedup();
            let mut total = Rational::ZERO;
            for w in cuts.windows(2) {
                let (a, b) = (w[0], w[1]);
                let cdf: Rational = atoms.iter().filter(|(x, _)| *x <= a).map(|(_, p)| *p).sum();
                let tail: Rational = (0..index)
                    .map(|j| {
                        Rational::from_integer(binomial(count, j))
                            * cdf.pow(j as u32)
                            * (Rational::ONE - cdf).pow((count - j) as u32)
                    })
                    .sum();
                total += tail * (b - a);
            }
            Ok(total)
        }
    }
}
