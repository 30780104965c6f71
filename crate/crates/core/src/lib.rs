//! Facility location on a line: phantom and rank mechanisms, their random
//! mixtures, and exact checkers for anonymity, strategyproofness, efficiency
//! and proportionality.

pub mod analysis;
pub mod axioms;
pub mod error;
pub mod location;
pub mod mechanism;
pub mod mechanisms;
pub mod outcome;
pub mod profile;
pub mod rational;
pub mod search;
pub mod table;

pub use error::{Error, Result};
pub use location::{Domain, ExtLocation};
pub use mechanism::{
    DeterministicMechanism, IidPhantomSpec, Mechanism, PhantomDistribution, RandomizedMechanism,
};
pub use mechanisms::MechanismSpec;
pub use outcome::OutcomeDistribution;
pub use profile::Profile;
pub use rational::Rational;
