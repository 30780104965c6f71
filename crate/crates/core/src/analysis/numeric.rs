//! Floating-point cross-checks for the i.i.d. uniform phantom family.
//!
//! Results here are approximations with an explicit error estimate. They
//! never decide equalities; they can only confirm a strict inequality whose
//! margin exceeds the estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::RandomizedMechanism;
use crate::profile::Profile;
use crate::rational::Rational;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_CELLS: usize = 400_000;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 0x5eed;
const MC_BATCHES: u64 = 64;
const ROUNDING_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OracleMode {
    Quadrature { tolerance: f64, max_cells: usize },
    MonteCarlo { samples: u64, seed: u64 },
}

impl OracleMode {
    pub fn quadrature() -> Self {
        OracleMode::Quadrature {
            tolerance: DEFAULT_TOLERANCE,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }

    pub fn monte_carlo(seed: u64) -> Self {
        OracleMode::MonteCarlo {
            samples: DEFAULT_SAMPLES,
            seed,
        }
    }

    /// Quadrature for up to two random phantoms, Monte Carlo beyond.
    pub fn default_for(n: usize) -> Self {
        if n <= 3 {
            Self::quadrature()
        } else {
            Self::monte_carlo(DEFAULT_SEED)
        }
    }
}

/// Approximate expectations. `error_bound` covers every entry: the cubature
/// error estimate, or three standard errors for Monte Carlo.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericEstimate {
    pub expected_location: f64,
    /// Indexed by agent (0-based).
    pub expected_distances: Vec<f64>,
    pub error_bound: f64,
    pub mode: OracleMode,
    pub evaluations: u64,
    /// Set when the value is known exactly (unanimous profiles).
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum NumericComparison {
    Exceeds { margin: f64 },
    Below { margin: f64 },
    Inconclusive { difference: f64 },
}

impl NumericEstimate {
    /// Compares an agent's expected distance with an exact bound.
    pub fn compare_distance(&self, agent: usize, bound: &Rational) -> NumericComparison {
        let d = self.expected_distances[agent] - bound.to_f64();
        if self.exact {
            return if d > 0.0 {
                NumericComparison::Exceeds { margin: d }
            } else {
                NumericComparison::Below { margin: -d }
            };
        }
        if d > self.error_bound {
            NumericComparison::Exceeds { margin: d }
        } else if -d > self.error_bound {
            NumericComparison::Below { margin: -d }
        } else {
            NumericComparison::Inconclusive { difference: d }
        }
    }
}

/// Location and per-agent distances of one realization of the interior
/// phantoms.
struct Integrand {
    agents: Vec<f64>,
}

impl Integrand {
    fn outputs(&self) -> usize {
        self.agents.len() + 1
    }

    fn eval(&self, phantoms: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        scratch.clear();
        scratch.extend_from_slice(&self.agents);
        scratch.extend_from_slice(phantoms);
        scratch.push(0.0);
        scratch.push(1.0);
        let mid = scratch.len() / 2;
        let (_, m, _) = scratch.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
        let f = *m;
        out[0] += f;
        for (o, x) in out[1..].iter_mut().zip(&self.agents) {
            *o += (f - x).abs();
        }
    }
}

pub fn numeric_expectation_oracle(
    rm: &RandomizedMechanism,
    x: &Profile,
    mode: OracleMode,
) -> Result<NumericEstimate> {
    let Some(family) = rm.uniform_family_weight() else {
        return Err(Error::NotApplicable {
            what: "numeric oracle".into(),
            reason: format!("{rm} has no continuous phantom family"),
        });
    };
    if x.n() != rm.n() {
        return Err(Error::AgentCount {
            mechanism: rm.n(),
            profile: x.n(),
        });
    }
    // exact part from the finite components
    let mut exact_location = 0.0;
    let mut exact_distances = vec![0.0; x.n()];
    for (m, w) in rm.components() {
        let y = m.evaluate(x)?;
        exact_location += (y * *w).to_f64();
        for (d, xi) in exact_distances.iter_mut().zip(x.locations()) {
            *d += (y.abs_diff(xi) * *w).to_f64();
        }
    }
    let integrand = Integrand {
        agents: x.locations().iter().map(Rational::to_f64).collect(),
    };
    let (values, error, evaluations, exact) = if x.distinct_count() == 1 {
        let c = integrand.agents[0];
        let mut v = vec![0.0; integrand.outputs()];
        v[0] = c;
        (v, 0.0, 0, true)
    } else {
        match mode {
            OracleMode::Quadrature { tolerance, max_cells } => {
                let (v, e, k) = cubature(&integrand, x, tolerance, max_cells);
                (v, e, k, false)
            }
            OracleMode::MonteCarlo { samples, seed } => {
                let (v, e) = monte_carlo(&integrand, x.n() - 1, samples, seed);
                (v, e, samples, false)
            }
        }
    };
    let w = family.to_f64();
    Ok(NumericEstimate {
        expected_location: exact_location + w * values[0],
        expected_distances: exact_distances
            .iter()
            .zip(&values[1..])
            .map(|(e, v)| e + w * v)
            .collect(),
        error_bound: w * error,
        mode,
        evaluations,
        exact,
    })
}

// two-point Gauss-Legendre on [-1, 1]
const GAUSS_NODE: f64 = 0.577_350_269_189_625_8;

fn gauss_rule(integrand: &Integrand, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let d = lo.len();
    let mut out = vec![0.0; integrand.outputs()];
    let mut point = vec![0.0; d];
    let mut scratch = Vec::with_capacity(integrand.agents.len() + d + 2);
    for mask in 0..(1usize << d) {
        for k in 0..d {
            let c = 0.5 * (lo[k] + hi[k]);
            let h = 0.5 * (hi[k] - lo[k]);
            let s = if mask >> k & 1 == 1 { GAUSS_NODE } else { -GAUSS_NODE };
            point[k] = c + h * s;
        }
        integrand.eval(&point, &mut out, &mut scratch);
    }
    let volume: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let scale = volume / (1usize << d) as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

fn children(lo: &[f64], hi: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = lo.len();
    (0..(1usize << d))
        .map(|mask| {
            let mut clo = lo.to_vec();
            let mut chi = hi.to_vec();
            for k in 0..d {
                let mid = 0.5 * (lo[k] + hi[k]);
                if mask >> k & 1 == 1 {
                    clo[k] = mid;
                } else {
                    chi[k] = mid;
                }
            }
            (clo, chi)
        })
        .collect()
}

struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.iter().zip(&self.lo).fold(Ordering::Equal, |o, (a, b)| {
                o.then(a.total_cmp(b))
            }))
    }
}

fn make_cell(integrand: &Integrand, lo: Vec<f64>, hi: Vec<f64>) -> Cell {
    let coarse = gauss_rule(integrand, &lo, &hi);
    let mut fine = vec![0.0; coarse.len()];
    for (clo, chi) in children(&lo, &hi) {
        for (f, v) in fine.iter_mut().zip(gauss_rule(integrand, &clo, &chi)) {
            *f += v;
        }
    }
    let error = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (c - f).abs())
        .fold(0.0, f64::max);
    Cell {
        lo,
        hi,
        value: fine,
        error,
    }
}

/// Adaptive cubature over `[0, 1]^(n−1)`, pre-split at the agent locations.
fn cubature(integrand: &Integrand, x: &Profile, tolerance: f64, max_cells: usize) -> (Vec<f64>, f64, u64) {
    let d = x.n() - 1;
    let mut cuts: Vec<f64> = integrand.agents.clone();
    cuts.extend([0.0, 1.0]);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let intervals: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
    let mut boxes: Vec<(Vec<f64>, Vec<f64>)> = vec![(vec![], vec![])];
    for _ in 0..d {
        boxes = boxes
            .into_iter()
            .flat_map(|(lo, hi)| {
                intervals.iter().map(move |(a, b)| {
                    let mut lo = lo.clone();
                    let mut hi = hi.clone();
                    lo.push(*a);
                    hi.push(*b);
                    (lo, hi)
                })
            })
            .collect();
    }
    let per_cell = (1u64 << d) + (1u64 << (2 * d));
    let mut evaluations = 0u64;
    let initial: Vec<Cell> = boxes
        .into_par_iter()
        .map(|(lo, hi)| make_cell(integrand, lo, hi))
        .collect();
    evaluations += per_cell * initial.len() as u64;
    let mut heap: BinaryHeap<Cell> = initial.into_iter().collect();
    let batch = 256;
    loop {
        let total_error: f64 = heap.iter().map(|c| c.error).sum();
        if total_error <= tolerance || heap.len() >= max_cells {
            break;
        }
        let mut work = Vec::with_capacity(batch);
        while work.len() < batch {
            match heap.pop() {
                Some(c) if c.error > 0.0 => work.push(c),
                Some(c) => {
                    heap.push(c);
                    break;
                }
                None => break,
            }
        }
        if work.is_empty() {
            break;
        }
        let split: Vec<Cell> = work
            .par_iter()
            .flat_map_iter(|c| {
                children(&c.lo, &c.hi)
                    .into_iter()
                    .map(|(lo, hi)| make_cell(integrand, lo, hi))
                    .collect::<Vec<_>>()
            })
            .collect();
        evaluations += per_cell * split.len() as u64;
        heap.extend(split);
    }
    let cells = heap.into_sorted_vec();
    let mut value = vec![0.0; integrand.outputs()];
    let mut error = 0.0;
    for c in &cells {
        for (v, cv) in value.iter_mut().zip(&c.value) {
            *v += cv;
        }
        error += c.error;
    }
    (value, error + ROUNDING_FLOOR, evaluations)
}

#[derive(Clone, Default)]
struct Moments {
    count: u64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Moments {
            count: 0,
            sum: vec![0.0; k],
            sum_sq: vec![0.0; k],
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.count += 1;
        for ((s, q), v) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(values) {
            *s += v;
            *q += v * v;
        }
    }

    fn merge(mut self, other: Moments) -> Moments {
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(other.sum_sq) {
            *a += b;
        }
        self
    }

    fn mean_and_se(&self) -> Vec<(f64, f64)> {
        let n = self.count as f64;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, q)| {
                let mean = s / n;
                let var = ((q / n) - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
                (mean, (var / n).sqrt())
            })
            .collect()
    }
}

/// Runs `samples` draws in fixed batches; batch `b` uses stream `b` of the
/// seeded generator, so results do not depend on thread scheduling.
fn batched_moments<F>(samples: u64, seed: u64, outputs: usize, draw: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<f64>) + Sync,
{
    let per_batch = samples / MC_BATCHES;
    let extra = samples % MC_BATCHES;
    (0..MC_BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = per_batch + u64::from(b < extra);
            let mut m = Moments::new(outputs);
            let mut buf = vec![0.0; outputs];
            for _ in 0..count {
                draw(&mut rng, &mut buf);
                m.push(&buf);
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::new(outputs), Moments::merge)
}

fn monte_carlo(integrand: &Integrand, draws: usize, samples: u64, seed: u64) -> (Vec<f64>, f64) {
    let moments = batched_moments(samples, seed, integrand.outputs(), |rng, out| {
        let phantoms: Vec<f64> = (0..draws).map(|_| rng.gen::<f64>()).collect();
        let mut scratch = Vec::with_capacity(integrand.agents.len() + draws + 2);
        out.iter_mut().for_each(|v| *v = 0.0);
        integrand.eval(&phantoms, out, &mut scratch);
    });
    let stats = moments.mean_and_se();
    let se = stats.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    (stats.into_iter().map(|(m, _)| m).collect(), 3.0 * se)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleMean {
    pub mean: f64,
    pub std_error: f64,
}

/// Sample means of all order statistics of `count` i.i.d. uniforms.
pub fn monte_carlo_order_stat_means(count: usize, samples: u64, seed: u64) -> Vec<SampleMean> {
    let moments = batched_moments(samples, seed, count, |rng, out| {
        for v in out.iter_mut() {
            *v = rng.gen::<f64>();
        }
        out.sort_by(f64::total_cmp);
    });
    moments
        .mean_and_se()
        .into_iter()
        .map(|(mean, std_error)| SampleMean { mean, std_error })
        .collect()
}
