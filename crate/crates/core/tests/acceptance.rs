//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use facloc_core::analysis::marginals::rank_phantom_marginals;
use facloc_core::analysis::numeric::monte_carlo_order_stat_means;
use facloc_core::analysis::order_stats::uniform_order_stat_mean;
use facloc_core::analysis::prop1::{prop1_grid_sweep, prop1_infeasibility, Prop1Outcome};
use facloc_core::analysis::weights::{rank_weight_system, solve_rank_weights, solve_weight_system};
use facloc_core::axioms::{
    check, check_spf, verify_witness, Axiom, AxiomId, CheckDomain, Status, Variant,
};
use facloc_core::mechanisms::{average_or_random_rank, random_rank};
use facloc_core::table::{property_table, Property, TableConfig, TableMechanism};
use facloc_core::{
    DeterministicMechanism, Domain, Mechanism, MechanismSpec, Profile, RandomizedMechanism, Rational,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn worked_example() -> Outcome {
    let x = Profile::unit(vec![q(0, 1), q(0, 1), q(1, 3)]).map_err(err)?;
    let rr = random_rank(3, Domain::UnitInterval).map_err(err)?;
    let mut best = Duration::MAX;
    let mut result = None;
    for _ in 0..50 {
        let start = Instant::now();
        let d = rr.outcome_distribution(&x).map_err(err)?;
        let loc = rr.expected_location(&x).map_err(err)?;
        best = best.min(start.elapsed());
        result = Some((d, loc));
    }
    let (d, loc) = result.unwrap();
    ensure!(loc == q(1, 9), "expected location {loc}");
    ensure!(
        d.atoms() == [(q(0, 1), q(2, 3)), (q(1, 3), q(1, 3))],
        "atoms {:?}",
        d.atoms()
    );
    ensure!(best < Duration::from_millis(1), "took {best:?}");
    Ok(format!("location 1/9, atoms {{0: 2/3, 1/3: 1/3}} in {best:?}"))
}

const REFERENCE_MATRIX: [[bool; 5]; 6] = [
    [true, true, true, true, true],
    [true, true, false, true, true],
    [true, true, true, true, false],
    [false, true, true, true, true],
    [true, true, true, false, false],
    [true, true, true, true, false],
];

fn property_matrix() -> Outcome {
    let start = Instant::now();
    let mut margins = Vec::new();
    for n in 2..=4 {
        let table = property_table(&TableConfig::new(n, 6, q(1, 2))).map_err(err)?;
        for (row, expected) in table.rows.iter().zip(REFERENCE_MATRIX) {
            for (cell, want) in row.cells.iter().zip(expected) {
                ensure!(
                    cell.holds == want,
                    "n = {n}: {} / {} is {}",
                    row.title,
                    cell.property.title(),
                    cell.holds
                );
                ensure!(cell.holds || cell.verdict.witness.is_some(), "No cell without witness");
            }
        }
        let ua = table
            .cell(TableMechanism::RandomDictatorship, Property::UniversalAnonymity)
            .unwrap();
        ensure!(ua.verdict.witness.is_some(), "dictatorship anonymity witness missing");
        let sp = table
            .cell(TableMechanism::RandomPhantom, Property::StrongProportionalityInExpectation)
            .unwrap();
        let oracle = sp.oracle.as_ref().ok_or("no numeric footnote on random phantom")?;
        ensure!(
            oracle.confirmed && oracle.margin > 1e-6 && oracle.margin > oracle.error_bound,
            "numeric margin {} (error bound {})",
            oracle.margin,
            oracle.error_bound
        );
        margins.push(oracle.margin);
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "all 30 cells at n = 2, 3, 4; numeric margins {:.3e}, {:.3e}, {:.3e}; {elapsed:.1?}",
        margins[0], margins[1], margins[2]
    ))
}

fn mixing_boundary() -> Outcome {
    let sp = AxiomId::new(Axiom::Strategyproofness, Variant::InExpectation);
    let mut checks = 0;
    for p in [q(0, 1), q(1, 4), q(1, 2)] {
        for n in 2..=4 {
            for m in 1..=12 {
                let mech: Mechanism = average_or_random_rank(p, n, Domain::UnitInterval)
                    .map_err(err)?
                    .into();
                let v = check(&mech, sp, &CheckDomain::unit(n, m)).map_err(err)?;
                ensure!(v.status == Status::Pass, "p = {p}, n = {n}, m = {m}: {v}");
                checks += 1;
            }
        }
    }
    for p in [q(51, 100), q(3, 5), q(1, 1)] {
        for n in 2..=4 {
            let mech: Mechanism = average_or_random_rank(p, n, Domain::UnitInterval)
                .map_err(err)?
                .into();
            let v = check(&mech, sp, &CheckDomain::unit(n, 12)).map_err(err)?;
            ensure!(v.status == Status::Fail && v.exact, "p = {p}, n = {n}: {v}");
            let w = v.witness.as_ref().unwrap();
            ensure!(verify_witness(&mech, sp, w).map_err(err)?, "witness {w} does not re-verify");
            checks += 1;
        }
    }
    Ok(format!("{checks} exact checks, failures re-verified for p > 1/2"))
}

fn two_agent_infeasibility() -> Outcome {
    let outcome = prop1_infeasibility(&[q(1, 2), q(1, 1)]).map_err(err)?;
    let Prop1Outcome::Infeasible { certificate } = outcome else {
        return Err("no certificate".into());
    };
    let forced: Vec<_> = certificate
        .forced
        .iter()
        .map(|f| (f.profile.locations().to_vec(), f.output))
        .collect();
    ensure!(
        forced
            == [
                (vec![q(0, 1), q(1, 2)], q(1, 4)),
                (vec![q(0, 1), q(1, 1)], q(1, 2)),
            ],
        "forced outputs {forced:?}"
    );
    ensure!(certificate.lower.value > certificate.upper.value, "bounds do not cross");
    let survivors = prop1_grid_sweep(&[q(1, 2), q(1, 1)], 40).map_err(err)?;
    ensure!(survivors.is_empty(), "{} phantom triples survive", survivors.len());
    let singles = prop1_grid_sweep(&[q(1, 2)], 40).map_err(err)?.len()
        + prop1_grid_sweep(&[q(1, 1)], 40).map_err(err)?.len();
    ensure!(singles > 0, "sweep finds nothing even for one forced output");
    Ok(format!(
        "certificate on phantom {}: {} > {}; m = 40 sweep has no survivors",
        certificate.lower.phantom, certificate.lower.value, certificate.upper.value
    ))
}

fn rank_marginals() -> Outcome {
    for domain in [Domain::UnitInterval, Domain::RealLine] {
        for n in 2..=8 {
            let marginals = rank_phantom_marginals(&random_rank(n, domain).map_err(err)?).map_err(err)?;
            ensure!(marginals.len() == n - 1, "n = {n}: {} marginals", marginals.len());
            for m in &marginals {
                let i = m.index as i128;
                ensure!(
                    m.top == q(i, n as i128) && m.bottom == q(n as i128 - i, n as i128),
                    "{domain}, n = {n}, index {i}: top {} bottom {}",
                    m.top,
                    m.bottom
                );
            }
        }
    }
    Ok("Pr[top] = i/n for n = 2..8 on [0,1] (top 1) and the real line (top +inf)".into())
}

fn weight_uniqueness() -> Outcome {
    let mut perturbed = 0;
    for n in 2..=6 {
        let solution = solve_rank_weights(n, Domain::UnitInterval).map_err(err)?;
        ensure!(solution.is_uniform_unique(n), "n = {n}: {solution:?}");
        let system = rank_weight_system(n, Domain::UnitInterval, 6).map_err(err)?;
        for (row, _) in system.constraints.iter().enumerate() {
            for delta in [q(1, 100), q(-1, 100)] {
                let mut moved = system.clone();
                moved.constraints[row].rhs += delta;
                let s = solve_weight_system(&moved).map_err(err)?;
                ensure!(
                    !s.is_uniform_unique(n),
                    "n = {n}: shifting row {row} ({}) by {delta} keeps uniform weights",
                    moved.constraints[row].provenance.join("; ")
                );
                perturbed += 1;
            }
        }
    }
    Ok(format!("uniform weights unique for n = 2..6; {perturbed} perturbed systems all lose it"))
}

fn order_statistic_means() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=10usize {
        for i in 1..n {
            let mean = uniform_order_stat_mean(n, i).map_err(err)?;
            ensure!(mean == q(i as i128, n as i128), "n = {n}, i = {i}: {mean}");
        }
        let sampled = monte_carlo_order_stat_means(n - 1, 1_000_000, 0x5eed + n as u64);
        for (i, s) in sampled.iter().enumerate() {
            let z = (s.mean - (i + 1) as f64 / n as f64).abs() / s.std_error;
            worst = worst.max(z);
            ensure!(z <= 3.0, "n = {n}, i = {}: {} is {z:.2} standard errors off", i + 1, s.mean);
        }
    }
    Ok(format!("exact i/n for n <= 10; Monte Carlo within {worst:.2} standard errors"))
}

fn spf_random_rank() -> Outcome {
    let mut instances = 0;
    for n in 2..=4 {
        let rr: Mechanism = random_rank(n, Domain::UnitInterval).map_err(err)?.into();
        let dom = CheckDomain::unit(n, 6).with_subset_cap(n);
        let v = check_spf(&rr, Variant::InExpectation, &dom).map_err(err)?;
        ensure!(v.status == Status::Pass && !v.partial_coverage, "n = {n}: {v}");
        instances += v.instances;
    }
    Ok(format!("passes with every coalition, {instances} profiles"))
}

fn real_line() -> Outcome {
    let ids = [
        AxiomId::new(Axiom::StrongProportionality, Variant::InExpectation),
        AxiomId::new(Axiom::Anonymity, Variant::Universal),
        AxiomId::new(Axiom::Strategyproofness, Variant::Universal),
    ];
    for n in 2..=4 {
        let rr: Mechanism = random_rank(n, Domain::RealLine).map_err(err)?.into();
        let dom = CheckDomain::real(n, 1, 10);
        for id in ids {
            let v = check(&rr, id, &dom).map_err(err)?;
            ensure!(v.status == Status::Pass, "n = {n}: {v}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..1000 {
        let n = rng.gen_range(2..=7usize);
        let locations: Vec<Rational> = (0..n)
            .map(|_| q(rng.gen_range(-1000..=1000), rng.gen_range(1..=60)))
            .collect();
        let x = Profile::real(locations).map_err(err)?;
        let k = rng.gen_range(1..=n);
        let direct = DeterministicMechanism::RankK(k);
        let phantom = direct.to_phantom_form(n, Domain::RealLine).map_err(err)?;
        let (a, b) = (direct.evaluate(&x).map_err(err)?, phantom.evaluate(&x).map_err(err)?);
        ensure!(a == b, "trial {trial}: rank {k} on {x}: {a} vs phantom form {b}");
    }
    Ok("strong proportionality and universal anonymity/truthfulness on [-10,10]; 1000 phantom forms agree".into())
}

fn catalog(n: usize, domain: Domain) -> Vec<Mechanism> {
    let mut specs = vec![
        "random_rank",
        "random_dictator",
        "avg_or_rr:p=0",
        "avg_or_rr:p=1/4",
        "avg_or_rr:p=1/2",
        "avg_or_rr:p=3/5",
        "avg_or_rr:p=1",
        "median",
        "rank:k=1",
        "dictator:i=1",
        "average",
    ]
    .into_iter()
    .map(str::to_string)
    .collect::<Vec<_>>();
    if domain == Domain::UnitInterval {
        specs.push("random_phantom".into());
        specs.push("uniform_phantom".into());
        specs.push(r#"iid_phantom:{atoms:[["1/3","1/2"],["1","1/2"]]}"#.into());
        let ys: Vec<String> = (0..=n).map(|j| format!("{j}/{n}")).collect();
        specs.push(format!("phantom:[{}]", ys.join(",")));
    }
    let mut out = Vec::new();
    for s in specs {
        let m = s.parse::<MechanismSpec>().unwrap().build(n, domain).unwrap();
        if let Mechanism::Deterministic(d) = &m {
            out.push(RandomizedMechanism::degenerate(d.clone(), n, domain).unwrap().into());
        }
        out.push(m);
    }
    out
}

fn status(m: &Mechanism, axiom: Axiom, variant: Variant, dom: &CheckDomain) -> Option<Status> {
    check(m, AxiomId::new(axiom, variant), dom).ok().map(|v| v.status)
}

fn implication_chain() -> Outcome {
    let mut domains = Vec::new();
    for n in 2..=4 {
        domains.push(CheckDomain::unit(n, 6));
    }
    domains.push(CheckDomain::real(2, 1, 10));
    domains.push(CheckDomain::real(3, 1, 4));
    let mut implications = 0;
    for dom in &domains {
        for m in catalog(dom.n, dom.domain) {
            for variant in [Variant::Deterministic, Variant::InExpectation] {
                let spf = status(&m, Axiom::Spf, variant, dom);
                let strong = status(&m, Axiom::StrongProportionality, variant, dom);
                let prop = status(&m, Axiom::Proportionality, variant, dom);
                let chain = [(spf, strong), (strong, prop)];
                for (stronger, weaker) in chain {
                    if let (Some(s), Some(w)) = (stronger, weaker) {
                        ensure!(
                            !(s == Status::Pass && w == Status::Fail),
                            "{m} on n = {} {}: {variant} chain broken",
                            dom.n,
                            dom.domain
                        );
                        implications += 1;
                    }
                }
            }
            for axiom in [Axiom::Strategyproofness, Axiom::Anonymity] {
                let universal = status(&m, axiom, Variant::Universal, dom);
                let expected = status(&m, axiom, Variant::InExpectation, dom);
                if let (Some(u), Some(e)) = (universal, expected) {
                    ensure!(
                        !(u == Status::Pass && e == Status::Fail),
                        "{m} on n = {} {}: universal {axiom} passes but expectation fails",
                        dom.n,
                        dom.domain
                    );
                    implications += 1;
                }
            }
        }
    }
    ensure!(implications > 0, "no implication was exercised");
    Ok(format!("{implications} implications hold across {} check domains", domains.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("random rank worked example is exact", worked_example),
        ("property matrix regenerates at n = 2, 3, 4", property_matrix),
        ("average-or-rank is strategyproof in expectation iff p <= 1/2", mixing_boundary),
        ("two-agent phantom rules cannot be strongly proportional", two_agent_infeasibility),
        ("rank phantom marginals are i/n", rank_marginals),
        ("uniform rank weights are the unique strongly proportional mixture", weight_uniqueness),
        ("uniform order statistic means are i/n", order_statistic_means),
        ("random rank is SPF in expectation", spf_random_rank),
        ("random rank on the real line", real_line),
        ("axiom implications are never violated", implication_chain),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
