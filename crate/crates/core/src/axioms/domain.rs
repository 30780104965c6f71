use serde::Serialize;

use crate::analysis::numeric::OracleMode;
use crate::error::{Error, Result};
use crate::location::Domain;
use crate::profile::Profile;
use crate::rational::Rational;

/// Largest profile space a check will enumerate.
pub const MAX_PROFILES: u128 = 50_000_000;

/// How in-expectation quantities of continuous phantom families are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ExpectationMethod {
    /// Closed forms; verdicts are exact.
    #[default]
    Exact,
    /// Floating-point oracle; fairness verdicts may be inconclusive.
    Numeric(OracleMode),
}

/// The finite verification domain: `n` agents with locations on the grid
/// `{k/grid}`, restricted to `[0, 1]` or to `[−window, window]` on the line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckDomain {
    pub n: usize,
    pub grid: i128,
    pub domain: Domain,
    pub window: i128,
    /// Enumerate every labelled profile even for mechanisms that are
    /// anonymous by construction.
    pub exhaustive: bool,
    /// Largest coalition size for fairness checks over arbitrary subsets;
    /// `None` means every size up to `n` for `n ≤ 5`, and 5 beyond.
    pub spf_subset_cap: Option<usize>,
    pub expectation: ExpectationMethod,
}

impl CheckDomain {
    pub fn unit(n: usize, grid: i128) -> Self {
        CheckDomain {
            n,
            grid,
            domain: Domain::UnitInterval,
            window: 1,
            exhaustive: false,
            spf_subset_cap: None,
            expectation: ExpectationMethod::Exact,
        }
    }

    pub fn real(n: usize, grid: i128, window: i128) -> Self {
        CheckDomain {
            domain: Domain::RealLine,
            window,
            ..CheckDomain::unit(n, grid)
        }
    }

    pub fn exhaustive(mut self) -> Self {
        self.exhaustive = true;
        self
    }

    pub fn with_subset_cap(mut self, cap: usize) -> Self {
        self.spf_subset_cap = Some(cap);
        self
    }

    pub fn with_expectation(mut self, method: ExpectationMethod) -> Self {
        self.expectation = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooFewAgents(self.n));
        }
        if self.grid < 1 {
            return Err(Error::CheckDomain(format!(
                "grid denominator must be positive, got {}",
                self.grid
            )));
        }
        if self.domain == Domain::RealLine && self.window < 1 {
            return Err(Error::CheckDomain(format!(
                "window must be positive, got {}",
                self.window
            )));
        }
        Ok(())
    }

    /// Grid locations in increasing order.
    pub fn grid_points(&self) -> Vec<Rational> {
        let (lo, hi) = match self.domain {
            Domain::UnitInterval => (0, self.grid),
            Domain::RealLine => (-self.window * self.grid, self.window * self.grid),
        };
        (lo..=hi).map(|k| Rational::new(k, self.grid)).collect()
    }

    /// Effective coalition cap and whether it leaves sizes unchecked.
    pub fn subset_cap(&self) -> (usize, bool) {
        let cap = self
            .spf_subset_cap
            .unwrap_or(if self.n <= 5 { self.n } else { 5 })
            .min(self.n);
        (cap, cap < self.n)
    }

    /// Profiles to check: every labelled profile, or only sorted ones.
    pub fn profiles(&self, sorted_only: bool) -> Result<ProfileSpace> {
        self.validate()?;
        ProfileSpace::new(self.grid_points(), self.n, self.domain, sorted_only)
    }
}

/// A lexicographically ordered set of grid profiles with random access, so
/// checks can run in parallel and still report the first failure.
#[derive(Clone, Debug)]
pub struct ProfileSpace {
    points: Vec<Rational>,
    n: usize,
    domain: Domain,
    sorted: Option<Vec<Vec<u16>>>,
    len: usize,
}

impl ProfileSpace {
    pub fn new(points: Vec<Rational>, n: usize, domain: Domain, sorted_only: bool) -> Result<Self> {
        let g = points.len() as u128;
        let full = g.checked_pow(n as u32).unwrap_or(u128::MAX);
        if sorted_only {
            let count = multichoose(g, n as u128);
            if count > MAX_PROFILES {
                return Err(Error::CheckDomain(format!("{count} sorted profiles is too many")));
            }
            let mut all = Vec::with_capacity(count as usize);
            let mut current = vec![0u16; n];
            sorted_tuples(points.len() as u16, 0, 0, &mut current, &mut all);
            let len = all.len();
            Ok(ProfileSpace {
                points,
                n,
                domain,
                sorted: Some(all),
                len,
            })
        } else {
            if full > MAX_PROFILES {
                return Err(Error::CheckDomain(format!("{full} profiles is too many")));
            }
            Ok(ProfileSpace {
                points,
                n,
                domain,
                sorted: None,
                len: full as usize,
            })
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: usize) -> Profile {
        let locations = match &self.sorted {
            Some(all) => all[index].iter().map(|&k| self.points[k as usize]).collect(),
            None => {
                let g = self.points.len();
                let mut digits = vec![Rational::ZERO; self.n];
                let mut rest = index;
                for slot in digits.iter_mut().rev() {
                    *slot = self.points[rest % g];
                    rest /= g;
                }
                digits
            }
        };
        Profile::new(self.domain, locations).expect("grid points lie in the domain")
    }
}

fn multichoose(g: u128, n: u128) -> u128 {
    // C(g + n − 1, n)
    let mut acc: u128 = 1;
    for i in 1..=n {
        acc = acc.saturating_mul(g + i - 1) / i;
    }
    acc
}

fn sorted_tuples(g: u16, from: u16, slot: usize, current: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
    if slot == current.len() {
        out.push(current.clone());
        return;
    }
    for k in from..g {
        current[slot] = k;
        sorted_tuples(g, k, slot + 1, current, out);
    }
}

/// Every subset of `0..n` with `1 ≤ size ≤ cap`, in increasing bitmask order.
pub fn subsets(n: usize, cap: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1u32 << n))
        .filter(move |mask| mask.count_ones() as usize <= cap)
        .map(move |mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
}
