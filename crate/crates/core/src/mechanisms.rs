//! Catalog of mechanisms and the textual mechanism specs used by the CLI.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::location::{Domain, ExtLocation};
use crate::mechanism::{
    DeterministicMechanism, IidPhantomSpec, Mechanism, PhantomDistribution, RandomizedMechanism,
};
use crate::rational::Rational;

/// Largest finite mixture an i.i.d. discrete phantom expansion may produce.
pub const DEFAULT_COMPONENT_CAP: usize = 10_000;

/// Uniform mixture of `RankK(k)` for `k = 1..=n`.
pub fn random_rank(n: usize, domain: Domain) -> Result<RandomizedMechanism> {
    let w = Rational::new(1, n as i128);
    let components = (1..=n).map(|k| (DeterministicMechanism::RankK(k), w)).collect();
    RandomizedMechanism::new("random_rank", n, domain, components, None)
}

/// Uniform mixture of the `n` dictatorships.
pub fn random_dictator(n: usize, domain: Domain) -> Result<RandomizedMechanism> {
    let w = Rational::new(1, n as i128);
    let components = (1..=n)
        .map(|i| (DeterministicMechanism::Dictator(i), w))
        .collect();
    RandomizedMechanism::new("random_dictator", n, domain, components, None)
}

/// The mean report with probability `p`, Random Rank otherwise.
pub fn average_or_random_rank(p: Rational, n: usize, domain: Domain) -> Result<RandomizedMechanism> {
    if p.is_negative() || p > Rational::ONE {
        return Err(Error::Probability(format!("p = {p} is outside [0, 1]")));
    }
    let w = (Rational::ONE - p) / Rational::from(n);
    let mut components = vec![(DeterministicMechanism::Average, p)];
    components.extend((1..=n).map(|k| (DeterministicMechanism::RankK(k), w)));
    RandomizedMechanism::new(format!("avg_or_rr:p={p}"), n, domain, components, None)
}

/// Endpoint phantoms at 0 and 1, the other `n − 1` i.i.d. uniform on `[0, 1]`.
pub fn random_phantom(n: usize, domain: Domain) -> Result<RandomizedMechanism> {
    if domain != Domain::UnitInterval {
        return Err(Error::DomainMismatch(
            "random phantom draws from U([0, 1]) and needs the unit interval".into(),
        ));
    }
    RandomizedMechanism::new("random_phantom", n, domain, Vec::new(), Some(Rational::ONE))
}

/// An i.i.d. phantom mechanism. Discrete distributions expand into the exact
/// finite mixture over phantom multisets (draws are exchangeable, so equal
/// multisets merge); at most `cap` components are produced.
pub fn iid_phantom(
    spec: &IidPhantomSpec,
    n: usize,
    domain: Domain,
    cap: usize,
) -> Result<RandomizedMechanism> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::TooFewAgents(n));
    }
    let atoms = match &spec.distribution {
        PhantomDistribution::UniformOn01 => return random_phantom(n, domain),
        PhantomDistribution::DiscreteAtoms(atoms) => atoms,
    };
    if domain != Domain::UnitInterval {
        return Err(Error::DomainMismatch("i.i.d. phantoms live on [0, 1]".into()));
    }
    let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
    for (x, p) in atoms {
        *merged.entry(*x).or_insert(Rational::ZERO) += *p;
    }
    let atoms: Vec<(Rational, Rational)> = merged.into_iter().collect();
    let draws = n - 1;
    let needed = multiset_count(draws, atoms.len());
    if needed > cap as u128 {
        return Err(Error::ExpansionTooLarge {
            needed: needed.min(usize::MAX as u128) as usize,
            cap,
        });
    }
    let mut components = Vec::with_capacity(needed as usize);
    let mut counts = vec![0usize; atoms.len()];
    enumerate_compositions(draws, 0, &mut counts, &mut |counts| {
        let mut weight = Rational::from_integer(multinomial(draws, counts));
        let mut phantoms = vec![ExtLocation::Finite(Rational::ZERO)];
        for ((x, p), &c) in atoms.iter().zip(counts) {
            weight = weight * p.pow(c as u32);
            phantoms.extend(std::iter::repeat_n(ExtLocation::Finite(*x), c));
        }
        phantoms.push(ExtLocation::Finite(Rational::ONE));
        components.push((DeterministicMechanism::Phantom(phantoms), weight));
    });
    let label = MechanismSpec::IidPhantom(spec.clone()).to_string();
    RandomizedMechanism::new(label, n, domain, components, None)
}

fn enumerate_compositions(
    remaining: usize,
    slot: usize,
    counts: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if slot + 1 == counts.len() {
        counts[slot] = remaining;
        visit(counts);
        return;
    }
    for c in (0..=remaining).rev() {
        counts[slot] = c;
        enumerate_compositions(remaining - c, slot + 1, counts, visit);
    }
}

fn multiset_count(draws: usize, kinds: usize) -> u128 {
    // C(draws + kinds - 1, kinds - 1), saturating
    let mut acc: u128 = 1;
    for i in 1..kinds as u128 {
        acc = acc.saturating_mul(draws as u128 + i) / i;
    }
    acc
}

fn multinomial(total: usize, counts: &[usize]) -> i128 {
    let mut acc: i128 = 1;
    let mut placed = 0i128;
    for &c in counts {
        for j in 1..=c as i128 {
            placed += 1;
            acc = acc * placed / j;
        }
    }
    debug_assert_eq!(placed as usize, total);
    acc
}

/// A parseable mechanism identity, e.g. `avg_or_rr:p=1/2` or
/// `phantom:[0,1/2,1]`. `build` instantiates it for `n` agents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MechanismSpec {
    RandomRank,
    RandomDictator,
    AvgOrRandomRank { p: Rational },
    RandomPhantom,
    IidPhantom(IidPhantomSpec),
    Median,
    UniformPhantom,
    Phantom(Vec<ExtLocation>),
    Rank { k: usize },
    Dictator { i: usize },
    Average,
}

impl MechanismSpec {
    pub fn build(&self, n: usize, domain: Domain) -> Result<Mechanism> {
        let det = |m: DeterministicMechanism| -> Result<Mechanism> {
            m.validate(n, domain)?;
            Ok(Mechanism::Deterministic(m))
        };
        Ok(match self {
            MechanismSpec::RandomRank => random_rank(n, domain)?.into(),
            MechanismSpec::RandomDictator => random_dictator(n, domain)?.into(),
            MechanismSpec::AvgOrRandomRank { p } => average_or_random_rank(*p, n, domain)?.into(),
            MechanismSpec::RandomPhantom => random_phantom(n, domain)?.into(),
            MechanismSpec::IidPhantom(spec) => {
                iid_phantom(spec, n, domain, DEFAULT_COMPONENT_CAP)?.into()
            }
            MechanismSpec::Median => det(DeterministicMechanism::Median)?,
            MechanismSpec::UniformPhantom => det(DeterministicMechanism::UniformPhantom)?,
            MechanismSpec::Phantom(ys) => det(DeterministicMechanism::phantom(ys.clone())?)?,
            MechanismSpec::Rank { k } => det(DeterministicMechanism::RankK(*k))?,
            MechanismSpec::Dictator { i } => det(DeterministicMechanism::Dictator(*i))?,
            MechanismSpec::Average => det(DeterministicMechanism::Average)?,
        })
    }
}

#[derive(Deserialize)]
struct AtomsJson {
    atoms: Vec<(Rational, Rational)>,
}

fn spec_error(spec: &str, reason: impl Into<String>) -> Error {
    Error::MechanismSpec {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn keyed_param<'a>(spec: &str, body: Option<&'a str>, key: &str) -> Result<&'a str> {
    let body = body.ok_or_else(|| spec_error(spec, format!("missing parameter {key}=…")))?;
    let (k, v) = body
        .split_once('=')
        .ok_or_else(|| spec_error(spec, format!("expected {key}=…, got {body:?}")))?;
    if k.trim() != key {
        return Err(spec_error(spec, format!("unknown parameter {:?}, expected {key}", k.trim())));
    }
    Ok(v.trim())
}

fn index_param(spec: &str, body: Option<&str>, key: &str) -> Result<usize> {
    keyed_param(spec, body, key)?
        .parse()
        .map_err(|_| spec_error(spec, format!("{key} must be a positive integer")))
}

impl FromStr for MechanismSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, body) = match s.split_once(':') {
            Some((name, body)) => (name.trim(), Some(body.trim())),
            None => (s, None),
        };
        let no_params = |spec: MechanismSpec| match body {
            None => Ok(spec),
            Some(b) => Err(spec_error(s, format!("{name} takes no parameters, got {b:?}"))),
        };
        match name {
            "random_rank" => no_params(MechanismSpec::RandomRank),
            "random_dictator" => no_params(MechanismSpec::RandomDictator),
            "random_phantom" => no_params(MechanismSpec::RandomPhantom),
            "median" => no_params(MechanismSpec::Median),
            "uniform_phantom" => no_params(MechanismSpec::UniformPhantom),
            "average" => no_params(MechanismSpec::Average),
            "avg_or_rr" => {
                let p: Rational = keyed_param(s, body, "p")?
                    .parse()
                    .map_err(|e: Error| spec_error(s, format!("field p: {e}")))?;
                if p.is_negative() || p > Rational::ONE {
                    return Err(spec_error(s, format!("field p: {p} is outside [0, 1]")));
                }
                Ok(MechanismSpec::AvgOrRandomRank { p })
            }
            "rank" => Ok(MechanismSpec::Rank {
                k: index_param(s, body, "k")?,
            }),
            "dictator" => Ok(MechanismSpec::Dictator {
                i: index_param(s, body, "i")?,
            }),
            "phantom" => {
                let body = body.ok_or_else(|| spec_error(s, "missing phantom list [..]"))?;
                let inner = body
                    .strip_prefix('[')
                    .and_then(|b| b.strip_suffix(']'))
                    .ok_or_else(|| spec_error(s, "phantoms must be written [y1,…,y(n+1)]"))?;
                let ys = inner
                    .split(',')
                    .enumerate()
                    .map(|(i, y)| {
                        y.parse::<ExtLocation>()
                            .map_err(|e| spec_error(s, format!("phantom {}: {e}", i + 1)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if ys.windows(2).any(|w| w[0] > w[1]) {
                    return Err(spec_error(s, "phantoms must be sorted non-decreasing"));
                }
                Ok(MechanismSpec::Phantom(ys))
            }
            "iid_phantom" => {
                let body = body.ok_or_else(|| spec_error(s, "missing distribution"))?;
                if body == "uniform" {
                    return Ok(MechanismSpec::IidPhantom(IidPhantomSpec::uniform()));
                }
                let json = match body.strip_prefix("{atoms:") {
                    Some(rest) => format!("{{\"atoms\":{rest}"),
                    None => body.to_string(),
                };
                let parsed: AtomsJson = serde_json::from_str(&json).map_err(|e| {
                    spec_error(s, format!("atoms, column {}: {e}", e.column()))
                })?;
                let spec = IidPhantomSpec::discrete(parsed.atoms)
                    .map_err(|e| spec_error(s, format!("atoms: {e}")))?;
                Ok(MechanismSpec::IidPhantom(spec))
            }
            other => Err(spec_error(s, format!("unknown mechanism {other:?}"))),
        }
    }
}

impl fmt::Display for MechanismSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismSpec::RandomRank => f.write_str("random_rank"),
            MechanismSpec::RandomDictator => f.write_str("random_dictator"),
            MechanismSpec::AvgOrRandomRank { p } => write!(f, "avg_or_rr:p={p}"),
            MechanismSpec::RandomPhantom => f.write_str("random_phantom"),
            MechanismSpec::IidPhantom(spec) => match &spec.distribution {
                PhantomDistribution::UniformOn01 => f.write_str("iid_phantom:uniform"),
                PhantomDistribution::DiscreteAtoms(atoms) => {
                    f.write_str("iid_phantom:{atoms:[")?;
                    for (i, (x, p)) in atoms.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "[\"{x}\",\"{p}\"]")?;
                    }
                    f.write_str("]}")
                }
            },
            MechanismSpec::Median => f.write_str("median"),
            MechanismSpec::UniformPhantom => f.write_str("uniform_phantom"),
            MechanismSpec::Phantom(ys) => {
                write!(f, "{}", DeterministicMechanism::Phantom(ys.clone()))
            }
            MechanismSpec::Rank { k } => write!(f, "rank:k={k}"),
            MechanismSpec::Dictator { i } => write!(f, "dictator:i={i}"),
            MechanismSpec::Average => f.write_str("average"),
        }
    }
}
