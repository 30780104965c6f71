use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use facloc_core::analysis::numeric::{numeric_expectation_oracle, OracleMode};
use facloc_core::analysis::prop1::{prop1_grid_sweep, prop1_infeasibility, Prop1Outcome};
use facloc_core::analysis::weights::{rank_weight_system, solve_weight_system, WeightSolution};
use facloc_core::axioms::{check, Axiom, AxiomId, AxiomVerdict, CheckDomain, ExpectationMethod, Status, Variant};
use facloc_core::search::search_manipulation;
use facloc_core::table::{property_table, TableConfig};
use facloc_core::{Domain, Mechanism, MechanismSpec, Profile, Rational, RandomizedMechanism};
use serde_json::json;

use crate::args::{
    CheckArgs, Cli, Command, DomainArg, Format, GridArgs, OracleArg, OracleArgs, Prop1Args, RunArgs,
    SearchArgs, TableArgs, VariantArg, WeightArgs,
};

/// Runs the subcommand and returns the process exit code.
pub fn dispatch(cli: &Cli) -> Result<u8> {
    let (report, code) = match &cli.command {
        Command::Run(a) => (run(a, cli.format)?, 0),
        Command::Check(a) => check_cmd(a, cli.format)?,
        Command::Table(a) => (table(a, cli.format)?, 0),
        Command::SearchManipulation(a) => (search(a, cli.format)?, 0),
        Command::SolveWeights(a) => (solve_weights(a, cli.format)?, 0),
        Command::Prop1(a) => (prop1(a, cli.format)?, 0),
    };
    emit(&report, cli.out.as_deref())?;
    Ok(code)
}

fn emit(report: &str, out: Option<&Path>) -> Result<()> {
    let mut text = report.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn domain_of(d: DomainArg) -> Domain {
    match d {
        DomainArg::Unit => Domain::UnitInterval,
        DomainArg::Real => Domain::RealLine,
    }
}

fn variant_of(v: VariantArg) -> Variant {
    match v {
        VariantArg::Det => Variant::Deterministic,
        VariantArg::Exp => Variant::InExpectation,
        VariantArg::Universal => Variant::Universal,
    }
}

fn oracle_mode(a: &OracleArgs, n: usize) -> Option<OracleMode> {
    match a.oracle {
        OracleArg::Exact => None,
        OracleArg::Quadrature => Some(OracleMode::Quadrature {
            tolerance: a.tolerance,
            max_cells: match OracleMode::default_for(n) {
                OracleMode::Quadrature { max_cells, .. } => max_cells,
                OracleMode::MonteCarlo { .. } => 400_000,
            },
        }),
        OracleArg::MonteCarlo => Some(OracleMode::MonteCarlo {
            samples: a.samples,
            seed: a.seed,
        }),
    }
}

fn parse_spec(text: &str) -> Result<MechanismSpec> {
    Ok(text.parse::<MechanismSpec>()?)
}

fn parse_rational(text: &str) -> Result<Rational> {
    Ok(text.parse::<Rational>()?)
}

/// An existing file is read as profile JSON; anything else is inline.
fn load_profile(text: &str, domain: Domain) -> Result<Profile> {
    let path = Path::new(text);
    if path.is_file() {
        let body = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Profile::from_json(&body).with_context(|| format!("in profile file {}", path.display()))
    } else {
        Ok(Profile::parse_inline(text, domain)?)
    }
}

fn check_domain(g: &GridArgs) -> CheckDomain {
    match domain_of(g.domain) {
        Domain::UnitInterval => CheckDomain::unit(g.n, g.grid),
        Domain::RealLine => CheckDomain::real(g.n, g.grid, g.window),
    }
}

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(Rational::to_string).collect()
}

fn run(a: &RunArgs, format: Format) -> Result<String> {
    let x = load_profile(&a.profile, domain_of(a.domain))?;
    let m = parse_spec(&a.mechanism)?.build(x.n(), x.domain())?;
    let continuous = matches!(&m, Mechanism::Randomized(rm) if rm.uniform_family_weight().is_some());
    let atoms = if continuous { None } else { Some(m.outcome_distribution(&x)?) };
    let location = m.expected_location(&x)?;
    let distances = x
        .locations()
        .iter()
        .map(|xi| m.expected_distance(&x, xi))
        .collect::<facloc_core::Result<Vec<_>>>()?;
    let numeric = match (&m, oracle_mode(&a.oracle, x.n())) {
        (Mechanism::Randomized(rm), Some(mode)) if continuous => {
            Some(numeric_expectation_oracle(rm, &x, mode)?)
        }
        _ => None,
    };

    Ok(match format {
        Format::Json => {
            let mut v = json!({
                "mechanism": m.to_string(),
                "profile": strings(x.locations()),
                "domain": x.domain(),
                "continuous": continuous,
                "expected_location": location.to_string(),
                "expected_distances": strings(&distances),
            });
            if let Some(d) = &atoms {
                v["atoms"] = serde_json::to_value(d)?["atoms"].clone();
            }
            if let Some(est) = &numeric {
                v["numeric"] = serde_json::to_value(est)?;
            }
            serde_json::to_string_pretty(&v)?
        }
        Format::Csv => {
            let mut out = String::from("quantity,key,value\n");
            if let Some(d) = &atoms {
                for (loc, p) in d.atoms() {
                    let _ = writeln!(out, "atom,{loc},{p}");
                }
            }
            let _ = writeln!(out, "expected_location,,{location}");
            for (i, d) in distances.iter().enumerate() {
                let _ = writeln!(out, "expected_distance,{},{d}", i + 1);
            }
            out
        }
        Format::Markdown => {
            let mut out = format!("mechanism: {m}\nprofile: {x}\n");
            match &atoms {
                Some(d) => {
                    out.push_str("\n| location | probability |\n|---|---|\n");
                    for (loc, p) in d.atoms() {
                        let _ = writeln!(out, "| {loc} | {p} |");
                    }
                    out.push('\n');
                }
                None => out.push_str("outcome: continuous (no atoms; closed-form expectations)\n"),
            }
            let _ = writeln!(out, "expected location: {location}");
            for (i, d) in distances.iter().enumerate() {
                let _ = writeln!(out, "expected distance of agent {}: {d}", i + 1);
            }
            if let Some(est) = &numeric {
                let _ = writeln!(
                    out,
                    "numeric estimate (inexact): location {:.12}, error bound {:.1e}",
                    est.expected_location, est.error_bound
                );
            }
            out
        }
    })
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Pass => 0,
        Status::Fail => 1,
        Status::Inconclusive => 2,
    }
}

fn check_cmd(a: &CheckArgs, format: Format) -> Result<(String, u8)> {
    let axiom: Axiom = a.axiom.parse()?;
    let id = AxiomId::new(axiom, variant_of(a.variant));
    let mut dom = check_domain(&a.grid);
    if a.exhaustive {
        dom = dom.exhaustive();
    }
    if let Some(cap) = a.subset_cap {
        dom = dom.with_subset_cap(cap);
    }
    if let Some(mode) = oracle_mode(&a.oracle, dom.n) {
        dom = dom.with_expectation(ExpectationMethod::Numeric(mode));
    }
    let mut m = parse_spec(&a.mechanism)?.build(dom.n, dom.domain)?;
    // a deterministic rule is a degenerate randomized one for the universal variants
    if let (Mechanism::Deterministic(d), Variant::Universal) = (&m, id.variant) {
        m = RandomizedMechanism::degenerate(d.clone(), dom.n, dom.domain)?.into();
    }
    let verdict = check(&m, id, &dom)?;
    Ok((render_verdict(&m, &verdict, format)?, exit_code(verdict.status)))
}

fn render_verdict(m: &Mechanism, v: &AxiomVerdict, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => v.to_json(),
        Format::Csv => {
            let mut out = String::from("mechanism,axiom,variant,status,instances,exact,profile,agent,group,misreport,lhs,relation,bound\n");
            let w = v.witness.as_ref();
            let field = |f: &dyn Fn(&facloc_core::axioms::Witness) -> String| w.map(f).unwrap_or_default();
            let _ = writeln!(
                out,
                "\"{m}\",{},{},{},{},{},\"{}\",{},\"{}\",{},{},{},{}",
                v.axiom,
                v.variant,
                v.status,
                v.instances,
                v.exact,
                field(&|w| w.profile.to_string()),
                field(&|w| w.agent.map(|a| a.to_string()).unwrap_or_default()),
                field(&|w| w.group.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")),
                field(&|w| w.misreport.as_ref().map(|r| format!("{}->{}", r.agent, r.to)).unwrap_or_default()),
                field(&|w| w.lhs.to_string()),
                field(&|w| w.relation.to_string()),
                field(&|w| w.bound.to_string()),
            );
            out
        }
        Format::Markdown => {
            let mut out = format!("mechanism: {m}\n{v}\nprofiles examined: {}\n", v.instances);
            if !v.exact {
                out.push_str("numeric estimates took part\n");
            }
            out
        }
    })
}

fn table(a: &TableArgs, format: Format) -> Result<String> {
    let mut config = TableConfig::new(a.n, a.grid, parse_rational(&a.p)?);
    if let Some(mode) = oracle_mode(&a.oracle, a.n) {
        config.oracle = mode;
    }
    let t = property_table(&config)?;
    Ok(match format {
        Format::Markdown => t.to_markdown(),
        Format::Csv => t.to_csv(),
        Format::Json => t.to_json(),
    })
}

fn search(a: &SearchArgs, format: Format) -> Result<String> {
    let dom = check_domain(&a.grid);
    let m = parse_spec(&a.mechanism)?.build(dom.n, dom.domain)?;
    let found = search_manipulation(&m, &dom)?;
    Ok(match (format, &found) {
        (Format::Json, _) => serde_json::to_string_pretty(&json!({
            "mechanism": m.to_string(),
            "manipulation": found,
        }))?,
        (Format::Csv, None) => "profile,agent,report,truthful_cost,misreport_cost,gain\n".into(),
        (Format::Csv, Some(s)) => format!(
            "profile,agent,report,truthful_cost,misreport_cost,gain\n\"{}\",{},{},{},{},{}\n",
            s.profile, s.agent, s.report, s.truthful_cost, s.misreport_cost, s.gain
        ),
        (Format::Markdown, None) => format!("mechanism: {m}\nnone found\n"),
        (Format::Markdown, Some(s)) => format!(
            "mechanism: {m}\nbest manipulation: at {} agent {} reports {}; expected cost {} -> {} (gain {})\n",
            s.profile, s.agent, s.report, s.truthful_cost, s.misreport_cost, s.gain
        ),
    })
}

fn solve_weights(a: &WeightArgs, format: Format) -> Result<String> {
    let system = rank_weight_system(a.n, domain_of(a.domain), a.grid)?;
    let solution = solve_weight_system(&system)?;
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "n": a.n,
            "solution": solution,
            "constraints": system,
        }))?,
        Format::Csv => {
            let mut out = String::from("rank,weight\n");
            if let WeightSolution::Unique { weights } = &solution {
                for (k, w) in weights.iter().enumerate() {
                    let _ = writeln!(out, "{},{w}", k + 1);
                }
            }
            out
        }
        Format::Markdown => {
            let mut out = format!(
                "rank mixtures on {} for n = {}: {} distinct constraints\n",
                domain_of(a.domain),
                a.n,
                system.constraints.len()
            );
            match &solution {
                WeightSolution::Unique { weights } => {
                    let _ = writeln!(out, "unique solution: [{}]", strings(weights).join(", "));
                }
                WeightSolution::NonUnique { variable, min, max, .. } => {
                    let _ = writeln!(out, "not unique: weight {} ranges over [{min}, {max}]", variable + 1);
                }
                WeightSolution::Infeasible { certificate } => {
                    let _ = writeln!(
                        out,
                        "infeasible; certificate multipliers [{}]",
                        strings(&certificate.multipliers).join(", ")
                    );
                }
            }
            out
        }
    })
}

fn prop1(a: &Prop1Args, format: Format) -> Result<String> {
    let points = a
        .points
        .iter()
        .map(|t| parse_rational(t))
        .collect::<Result<Vec<_>>>()?;
    let outcome = prop1_infeasibility(&points)?;
    let sweep = a.sweep.map(|m| prop1_grid_sweep(&points, m)).transpose()?;
    Ok(match format {
        Format::Json => {
            let mut v = json!({ "points": strings(&points), "outcome": outcome });
            if let (Some(m), Some(found)) = (a.sweep, &sweep) {
                v["sweep"] = json!({ "grid": m, "satisfying": found });
            }
            serde_json::to_string_pretty(&v)?
        }
        Format::Csv | Format::Markdown => {
            let mut out = String::new();
            match &outcome {
                Prop1Outcome::Infeasible { certificate: c } => {
                    for f in &c.forced {
                        let _ = writeln!(out, "on {} the output must be {}", f.profile, f.output);
                    }
                    let _ = writeln!(
                        out,
                        "phantom {} must be >= {} (from t = {}) and <= {} (from t = {}): infeasible",
                        c.lower.phantom, c.lower.value, c.lower.from_sample, c.upper.value, c.upper.from_sample
                    );
                    if let Some(note) = &c.manipulation {
                        let _ = writeln!(
                            out,
                            "any rule meeting the larger forced output is manipulable: on {} agent {} reports {} (cost {} -> {})",
                            note.profile, note.agent, note.report, note.truthful_cost, note.misreport_cost
                        );
                    }
                }
                Prop1Outcome::Satisfiable { phantoms } => {
                    let _ = writeln!(out, "satisfiable by phantoms [{}]", strings(phantoms).join(", "));
                }
            }
            if let (Some(m), Some(found)) = (a.sweep, &sweep) {
                let _ = writeln!(out, "grid 1/{m}: {} satisfying phantom triples", found.len());
            }
            out
        }
    })
}
