use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use facloc_core::analysis::numeric::{numeric_expectation_oracle, OracleMode};
use facloc_core::analysis::weights::solve_rank_weights;
use facloc_core::axioms::{check, Axiom, AxiomId, CheckDomain, Variant};
use facloc_core::mechanisms::{average_or_random_rank, random_phantom, random_rank};
use facloc_core::table::{property_table, TableConfig};
use facloc_core::{Domain, Mechanism, Profile, Rational};

fn outcome(c: &mut Criterion) {
    let x = Profile::unit(vec![Rational::ZERO, Rational::ZERO, Rational::new(1, 3)]).unwrap();
    let rr = random_rank(3, Domain::UnitInterval).unwrap();
    c.bench_function("random_rank_outcome", |b| {
        b.iter(|| rr.outcome_distribution(black_box(&x)).unwrap())
    });
    let rp = random_phantom(3, Domain::UnitInterval).unwrap();
    let y = Profile::unit(vec![Rational::new(1, 6), Rational::new(1, 2), Rational::new(5, 6)]).unwrap();
    c.bench_function("random_phantom_closed_form", |b| {
        b.iter(|| rp.expected_distance(black_box(&y), &Rational::new(1, 2)).unwrap())
    });
    c.bench_function("random_phantom_quadrature", |b| {
        b.iter(|| numeric_expectation_oracle(&rp, black_box(&y), OracleMode::quadrature()).unwrap())
    });
}

fn checkers(c: &mut Criterion) {
    let mut group = c.benchmark_group("checkers");
    let cases = [
        ("strong_prop_rr", Axiom::StrongProportionality, Variant::InExpectation),
        ("spf_rr", Axiom::Spf, Variant::InExpectation),
        ("sp_universal_rr", Axiom::Strategyproofness, Variant::Universal),
    ];
    for n in [2usize, 3, 4] {
        let rr: Mechanism = random_rank(n, Domain::UnitInterval).unwrap().into();
        let dom = CheckDomain::unit(n, 6);
        for (name, axiom, variant) in cases {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| check(&rr, AxiomId::new(axiom, variant), black_box(&dom)).unwrap())
            });
        }
        let avg: Mechanism = average_or_random_rank(Rational::new(1, 2), n, Domain::UnitInterval)
            .unwrap()
            .into();
        group.bench_with_input(BenchmarkId::new("sp_expectation_avg_or_rr", n), &n, |b, _| {
            b.iter(|| {
                check(&avg, AxiomId::new(Axiom::Strategyproofness, Variant::InExpectation), black_box(&dom))
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn analysis(c: &mut Criterion) {
    c.bench_function("solve_rank_weights_n5", |b| {
        b.iter(|| solve_rank_weights(black_box(5), Domain::UnitInterval).unwrap())
    });
    let mut slow = c.benchmark_group("table");
    slow.sample_size(10);
    slow.bench_function("default", |b| {
        b.iter(|| property_table(black_box(&TableConfig::default())).unwrap())
    });
    slow.finish();
}

criterion_group!(benches, outcome, checkers, analysis);
criterion_main!(benches);
