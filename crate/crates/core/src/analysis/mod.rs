//! Exact analyses: closed forms, linear feasibility, certificates and
//! numeric cross-checks.

pub mod lp;
pub mod marginals;
pub mod numeric;
pub mod order_stats;
pub mod prop1;
pub mod weights;
