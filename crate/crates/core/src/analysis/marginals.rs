//! Order-statistic marginals of the phantoms of a rank mixture.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::RandomizedMechanism;
use crate::rational::Rational;

/// `Pr[Y_(index) = top]` and `Pr[Y_(index) = bottom]`, where `Y_(index)` is
/// the `index`-th smallest interior phantom and top/bottom are the domain's
/// extremes (1 and 0, or +∞ and −∞).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderStatMarginal {
    pub index: usize,
    pub top: Rational,
    pub bottom: Rational,
}

/// Marginals of the `n − 1` interior phantom order statistics. Every
/// component's phantom form must use only the two extreme values.
pub fn rank_phantom_marginals(rm: &RandomizedMechanism) -> Result<Vec<OrderStatMarginal>> {
    if rm.uniform_family_weight().is_some() {
        return Err(Error::Analysis(
            "marginals are defined for two-valued phantoms only; the mixture has uniform phantoms"
                .into(),
        ));
    }
    let (n, domain) = (rm.n(), rm.domain());
    let (bottom, top) = (domain.bottom(), domain.top());
    let mut marginals: Vec<OrderStatMarginal> = (1..n)
        .map(|index| OrderStatMarginal {
            index,
            top: Rational::ZERO,
            bottom: Rational::ZERO,
        })
        .collect();
    for (m, w) in rm.components() {
        let phantoms = match m.to_phantom_form(n, domain)? {
            crate::mechanism::DeterministicMechanism::Phantom(ys) => ys,
            _ => unreachable!("phantom form is a phantom mechanism"),
        };
        if phantoms[0] != bottom || phantoms[n] != top {
            return Err(Error::Analysis(format!(
                "component {m} does not have extreme endpoint phantoms"
            )));
        }
        for (slot, y) in marginals.iter_mut().zip(&phantoms[1..n]) {
            if *y == top {
                slot.top += *w;
            } else if *y == bottom {
                slot.bottom += *w;
            } else {
                return Err(Error::Analysis(format!(
                    "component {m} has interior phantom {y}"
                )));
            }
        }
    }
    Ok(marginals)
}
