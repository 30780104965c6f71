use facloc_core::analysis::weights::rank_mixture;
use facloc_core::axioms::{check, verify_witness, Axiom, AxiomId, CheckDomain, Status, Variant};
use facloc_core::mechanism::{DeterministicMechanism, Mechanism, RandomizedMechanism};
use facloc_core::{Domain, MechanismSpec, Rational};
use proptest::prelude::*;

fn weights(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0i128..4, n)
        .prop_filter("some weight", |w| w.iter().any(|x| *x > 0))
        .prop_map(|w| {
            let total: i128 = w.iter().sum();
            w.into_iter().map(|x| Rational::new(x, total)).collect()
        })
}

fn sorted_phantoms(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0i128..=12, n + 1).prop_map(|mut v| {
        v.sort();
        v.into_iter().map(|k| Rational::new(k, 12)).collect()
    })
}

fn id(axiom: Axiom, variant: Variant) -> AxiomId {
    AxiomId::new(axiom, variant)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rank_mixtures_are_strongly_proportional_only_when_uniform(w in weights(3)) {
        let m: Mechanism = rank_mixture(&w, Domain::UnitInterval).unwrap().into();
        let dom = CheckDomain::unit(3, 6);
        let ut = check(&m, id(Axiom::Strategyproofness, Variant::Universal), &dom).unwrap();
        prop_assert_eq!(ut.status, Status::Pass);
        let sp = check(&m, id(Axiom::StrongProportionality, Variant::InExpectation), &dom).unwrap();
        let uniform = w.iter().all(|x| *x == Rational::new(1, 3));
        prop_assert_eq!(sp.status == Status::Pass, uniform);
        if let Some(wit) = &sp.witness {
            prop_assert!(verify_witness(&m, sp.id(), wit).unwrap());
        }
    }

    #[test]
    fn phantom_rules_are_strategyproof_and_anonymous(n in 2usize..=3, ys in sorted_phantoms(3)) {
        let m: Mechanism = DeterministicMechanism::phantom_at(&ys[..=n]).unwrap().into();
        let dom = CheckDomain::unit(n, 6);
        for axiom in [Axiom::Strategyproofness, Axiom::Anonymity] {
            let v = check(&m, id(axiom, Variant::Deterministic), &dom).unwrap();
            prop_assert_eq!(v.status, Status::Pass, "{}", v);
        }
    }

    #[test]
    fn mixtures_respect_the_implication_chain(
        ys in sorted_phantoms(2),
        zs in sorted_phantoms(2),
        a in 0i128..=4,
        with_average in any::<bool>(),
    ) {
        let (n, total) = (2usize, 4i128);
        let mut parts = vec![
            (DeterministicMechanism::phantom_at(&ys).unwrap(), Rational::new(a, total)),
        ];
        let rest = Rational::new(total - a, total);
        if with_average {
            parts.push((DeterministicMechanism::Average, rest));
        } else {
            parts.push((DeterministicMechanism::phantom_at(&zs).unwrap(), rest));
        }
        let m: Mechanism = RandomizedMechanism::new("mix", n, Domain::UnitInterval, parts, None)
            .unwrap()
            .into();
        let dom = CheckDomain::unit(n, 6);
        let status = |axiom, variant| check(&m, id(axiom, variant), &dom).unwrap();
        let spf = status(Axiom::Spf, Variant::InExpectation);
        let strong = status(Axiom::StrongProportionality, Variant::InExpectation);
        let prop = status(Axiom::Proportionality, Variant::InExpectation);
        prop_assert!(!(spf.passed() && strong.failed()));
        prop_assert!(!(strong.passed() && prop.failed()));
        let ut = status(Axiom::Strategyproofness, Variant::Universal);
        let sp = status(Axiom::Strategyproofness, Variant::InExpectation);
        prop_assert!(!(ut.passed() && sp.failed()));
        for v in [spf, strong, prop, ut, sp] {
            if let Some(w) = &v.witness {
                prop_assert!(verify_witness(&m, v.id(), w).unwrap(), "{}", v);
            }
        }
    }

    #[test]
    fn catalog_failures_reverify(pick in 0usize..8, axiom_pick in 0usize..5, n in 2usize..=3) {
        let specs = [
            "random_rank", "random_dictator", "avg_or_rr:p=3/5", "median",
            "uniform_phantom", "average", "dictator:i=2", "rank:k=1",
        ];
        let axioms = [
            Axiom::Anonymity, Axiom::Strategyproofness, Axiom::Proportionality,
            Axiom::StrongProportionality, Axiom::Spf,
        ];
        let m = specs[pick].parse::<MechanismSpec>().unwrap().build(n, Domain::UnitInterval).unwrap();
        let variant = if m.is_deterministic() { Variant::Deterministic } else { Variant::InExpectation };
        let aid = id(axioms[axiom_pick], variant);
        if let Ok(v) = check(&m, aid, &CheckDomain::unit(n, 6)) {
            if let Some(w) = &v.witness {
                prop_assert!(verify_witness(&m, aid, w).unwrap(), "{}", v);
            }
        }
    }
}
