use thiserror::Error;

use crate::rational::Rational;

/// Errors raised by mechanism construction, evaluation and the axiom deciders.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid rational {input:?}: {reason}")]
    ParseRational { input: String, reason: String },
    #[error("a profile needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("location {0} lies outside [0, 1]")]
    OutOfUnitInterval(Rational),
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("phantom mechanism for n = {n} needs {expected} phantoms, got {got}")]
    PhantomCount {
        n: usize,
        expected: usize,
        got: usize,
    },
    #[error("phantoms must be sorted non-decreasing")]
    UnsortedPhantoms,
    #[error("{0} has no phantom representation")]
    NotPhantomRepresentable(String),
    #[error("arithmetic on an infinite location")]
    InfiniteArithmetic,
    #[error("mechanism output is infinite on this profile")]
    InfiniteOutcome,
    #[error("agent {index} out of range 1..={n}")]
    AgentIndex { index: usize, n: usize },
    #[error("rank {k} out of range 1..={n}")]
    RankIndex { k: usize, n: usize },
    #[error("invalid probability weights: {0}")]
    Probability(String),
    #[error("mechanism built for {mechanism} agents applied to a profile of {profile} agents")]
    AgentCount { mechanism: usize, profile: usize },
    #[error(
        "the outcome of a continuous phantom family is not a finite distribution; \
         use the closed-form expectations or the numeric oracle"
    )]
    ContinuousOutcome,
    #[error("expansion needs {needed} components, cap is {cap}")]
    ExpansionTooLarge { needed: usize, cap: usize },
    #[error("invalid mechanism spec {spec:?}: {reason}")]
    MechanismSpec { spec: String, reason: String },
    #[error("{what} does not apply here: {reason}")]
    NotApplicable { what: String, reason: String },
    #[error("invalid check domain: {0}")]
    CheckDomain(String),
    #[error("analysis error: {0}")]
    Analysis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
