//! The mechanism × property summary matrix, computed by the checkers.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::numeric::{numeric_expectation_oracle, NumericComparison, OracleMode};
use crate::axioms::{check, Axiom, AxiomId, AxiomVerdict, CheckDomain, Status, Variant};
use crate::error::Result;
use crate::location::Domain;
use crate::mechanism::{DeterministicMechanism, Mechanism, RandomizedMechanism};
use crate::mechanisms::{average_or_random_rank, random_dictator, random_phantom, random_rank};
use crate::profile::Profile;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    UniversalTruthfulness,
    SpInExpectation,
    UniversalAnonymity,
    ProportionalityInExpectation,
    StrongProportionalityInExpectation,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::UniversalTruthfulness,
        Property::SpInExpectation,
        Property::UniversalAnonymity,
        Property::ProportionalityInExpectation,
        Property::StrongProportionalityInExpectation,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Property::UniversalTruthfulness => "Universal Truthfulness",
            Property::SpInExpectation => "SP in expectation",
            Property::UniversalAnonymity => "Universal Anonymity",
            Property::ProportionalityInExpectation => "Proportionality in expectation",
            Property::StrongProportionalityInExpectation => "Strong Proportionality in expectation",
        }
    }

    pub fn axiom_id(self) -> AxiomId {
        match self {
            Property::UniversalTruthfulness => AxiomId::new(Axiom::Strategyproofness, Variant::Universal),
            Property::SpInExpectation => AxiomId::new(Axiom::Strategyproofness, Variant::InExpectation),
            Property::UniversalAnonymity => AxiomId::new(Axiom::Anonymity, Variant::Universal),
            Property::ProportionalityInExpectation => {
                AxiomId::new(Axiom::Proportionality, Variant::InExpectation)
            }
            Property::StrongProportionalityInExpectation => {
                AxiomId::new(Axiom::StrongProportionality, Variant::InExpectation)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableMechanism {
    RandomRank,
    RandomDictatorship,
    RandomPhantom,
    AverageOrRandomRank,
    Median,
    UniformPhantom,
}

impl TableMechanism {
    pub const ALL: [TableMechanism; 6] = [
        TableMechanism::RandomRank,
        TableMechanism::RandomDictatorship,
        TableMechanism::RandomPhantom,
        TableMechanism::AverageOrRandomRank,
        TableMechanism::Median,
        TableMechanism::UniformPhantom,
    ];

    pub fn title(self, p: Rational) -> String {
        match self {
            TableMechanism::RandomRank => "Random Rank".into(),
            TableMechanism::RandomDictatorship => "Random Dictatorship".into(),
            TableMechanism::RandomPhantom => "Random Phantom".into(),
            TableMechanism::AverageOrRandomRank => format!("AverageOrRR (p={p})"),
            TableMechanism::Median => "Median".into(),
            TableMechanism::UniformPhantom => "Uniform Phantom".into(),
        }
    }

    /// The mechanism as checked for `property`: deterministic rules are
    /// wrapped as degenerate mixtures for the universal variants.
    pub fn instantiate(self, n: usize, p: Rational, property: Property) -> Result<Mechanism> {
        let domain = Domain::UnitInterval;
        let deterministic = |d: DeterministicMechanism| -> Result<Mechanism> {
            if property.axiom_id().variant == Variant::Universal {
                Ok(RandomizedMechanism::degenerate(d, n, domain)?.into())
            } else {
                d.validate(n, domain)?;
                Ok(Mechanism::Deterministic(d))
            }
        };
        Ok(match self {
            TableMechanism::RandomRank => random_rank(n, domain)?.into(),
            TableMechanism::RandomDictatorship => random_dictator(n, domain)?.into(),
            TableMechanism::RandomPhantom => random_phantom(n, domain)?.into(),
            TableMechanism::AverageOrRandomRank => average_or_random_rank(p, n, domain)?.into(),
            TableMechanism::Median => deterministic(DeterministicMechanism::Median)?,
            TableMechanism::UniformPhantom => deterministic(DeterministicMechanism::UniformPhantom)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableConfig {
    pub n: usize,
    pub grid: i128,
    pub p: Rational,
    pub oracle: OracleMode,
}

impl TableConfig {
    pub fn new(n: usize, grid: i128, p: Rational) -> Self {
        TableConfig {
            n,
            grid,
            p,
            oracle: OracleMode::default_for(n),
        }
    }
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig::new(3, 6, Rational::new(1, 2))
    }
}

/// Numeric confirmation of a failure found through a closed form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleFootnote {
    #[serde(serialize_with = "locations_only")]
    pub profile: Profile,
    pub agent: usize,
    pub bound: Rational,
    pub estimate: f64,
    pub error_bound: f64,
    pub margin: f64,
    pub confirmed: bool,
    pub mode: OracleMode,
}

fn locations_only<S: serde::Serializer>(p: &Profile, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.locations())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableCell {
    pub property: Property,
    pub holds: bool,
    pub verdict: AxiomVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleFootnote>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub mechanism: TableMechanism,
    pub title: String,
    pub cells: Vec<TableCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyTable {
    pub config: TableConfig,
    pub rows: Vec<TableRow>,
}

pub fn property_table(config: &TableConfig) -> Result<PropertyTable> {
    let dom = CheckDomain::unit(config.n, config.grid);
    let mut rows = Vec::with_capacity(TableMechanism::ALL.len());
    for mech in TableMechanism::ALL {
        let mut cells = Vec::with_capacity(Property::ALL.len());
        for property in Property::ALL {
            let m = mech.instantiate(config.n, config.p, property)?;
            let verdict = check(&m, property.axiom_id(), &dom)?;
            let oracle = oracle_footnote(&m, &verdict, config.oracle)?;
            cells.push(TableCell {
                property,
                holds: verdict.status == Status::Pass,
                verdict,
                oracle,
            });
        }
        rows.push(TableRow {
            mechanism: mech,
            title: mech.title(config.p),
            cells,
        });
    }
    Ok(PropertyTable {
        config: config.clone(),
        rows,
    })
}

/// Re-estimates a fairness failure of a continuous family numerically.
fn oracle_footnote(m: &Mechanism, verdict: &AxiomVerdict, mode: OracleMode) -> Result<Option<OracleFootnote>> {
    let Mechanism::Randomized(rm) = m else { return Ok(None) };
    let Some(w) = &verdict.witness else { return Ok(None) };
    let fairness = matches!(
        verdict.axiom,
        Axiom::Proportionality | Axiom::StrongProportionality | Axiom::Spf
    );
    if rm.uniform_family_weight().is_none() || !fairness {
        return Ok(None);
    }
    let agent = w.agent.expect("fairness witnesses name an agent");
    let est = numeric_expectation_oracle(rm, &w.profile, mode)?;
    let estimate = est.expected_distances[agent - 1];
    let comparison = est.compare_distance(agent - 1, &w.bound);
    Ok(Some(OracleFootnote {
        profile: w.profile.clone(),
        agent,
        bound: w.bound,
        estimate,
        error_bound: est.error_bound,
        margin: estimate - w.bound.to_f64(),
        confirmed: matches!(comparison, NumericComparison::Exceeds { .. }),
        mode,
    }))
}

impl PropertyTable {
    pub fn cell(&self, mech: TableMechanism, property: Property) -> Option<&TableCell> {
        self.rows
            .iter()
            .find(|r| r.mechanism == mech)?
            .cells
            .iter()
            .find(|c| c.property == property)
    }

    fn marker(&self, row: &TableRow, cell: &TableCell) -> &'static str {
        let starred = row.mechanism == TableMechanism::AverageOrRandomRank
            && cell.property == Property::SpInExpectation;
        match (cell.holds, starred) {
            (true, true) => "Yes*",
            (true, false) => "Yes",
            (false, _) => "No",
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "n = {}, grid 1/{}, p = {}\n",
            self.config.n, self.config.grid, self.config.p
        );
        out.push_str("| Mechanism |");
        for p in Property::ALL {
            let _ = write!(out, " {} |", p.title());
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(Property::ALL.len()));
        out.push('\n');
        let mut notes = Vec::new();
        for row in &self.rows {
            let _ = write!(out, "| {} |", row.title);
            for cell in &row.cells {
                let mut text = self.marker(row, cell).to_string();
                if let Some(w) = &cell.verdict.witness {
                    notes.push(format!("{}, {}: {w}", row.title, cell.property.title()));
                    let _ = write!(text, " [{}]", notes.len());
                }
                if let Some(o) = &cell.oracle {
                    notes.push(format!(
                        "{}, {}: numeric estimate {:.9} for agent {} vs bound {} (margin {:.3e}, error bound {:.1e}, {})",
                        row.title,
                        cell.property.title(),
                        o.estimate,
                        o.agent,
                        o.bound,
                        o.margin,
                        o.error_bound,
                        if o.confirmed { "confirmed" } else { "not separated" }
                    ));
                    let _ = write!(text, " [{}]", notes.len());
                }
                let _ = write!(out, " {text} |");
            }
            out.push('\n');
        }
        out.push('\n');
        for (i, note) in notes.iter().enumerate() {
            let _ = writeln!(out, "[{}] {note}", i + 1);
        }
        if self.rows.iter().any(|r| r.mechanism == TableMechanism::AverageOrRandomRank) {
            out.push_str("\n\\* holds exactly when p ≤ 1/2\n");
        }
        if self.config.n % 2 == 0 {
            out.push_str("Median takes the leftmost of the two middle reports when n is even.\n");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mechanism,property,value,status,witness\n");
        for row in &self.rows {
            for cell in &row.cells {
                let witness = cell
                    .verdict
                    .witness
                    .as_ref()
                    .map(|w| w.to_string().replace('"', "\"\""))
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    "\"{}\",\"{}\",{},{},\"{}\"",
                    row.title,
                    cell.property.title(),
                    self.marker(row, cell),
                    cell.verdict.status,
                    witness
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}
