use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "facloc",
    version,
    about = "Exact facility-location mechanisms on a line and their fairness and incentive axioms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a mechanism on one profile.
    Run(RunArgs),
    /// Decide an axiom over a grid of profiles. Exit code 0 pass, 1 fail, 2 inconclusive.
    Check(CheckArgs),
    /// Regenerate the mechanism × property matrix.
    Table(TableArgs),
    /// Find the most profitable unilateral misreport.
    SearchManipulation(SearchArgs),
    /// Solve for the rank weights that make a rank mixture strongly proportional.
    SolveWeights(WeightArgs),
    /// Certify that no two-agent phantom rule is strongly proportional.
    Prop1(Prop1Args),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Markdown,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Unit,
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Det,
    Exp,
    Universal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    /// Closed-form expectations only.
    Exact,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Numeric oracle for continuous phantom families.
    #[arg(long, value_enum, default_value_t = OracleArg::Exact)]
    pub oracle: OracleArg,

    /// Seed for Monte Carlo sampling.
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,

    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,

    /// Quadrature absolute tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Number of agents.
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    /// Grid resolution m: reports are multiples of 1/m.
    #[arg(long, default_value_t = 6)]
    pub grid: i128,

    #[arg(long, value_enum, default_value_t = DomainArg::Unit)]
    pub domain: DomainArg,

    /// Half-width of the integer window on the real line.
    #[arg(long, default_value_t = 10)]
    pub window: i128,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Mechanism spec, e.g. `random_rank` or `avg_or_rr:p=1/2`.
    #[arg(long)]
    pub mechanism: String,

    /// Inline profile `(0,0,1/3)` or a path to a profile JSON file.
    #[arg(long)]
    pub profile: String,

    /// Domain of an inline profile; files carry their own.
    #[arg(long, value_enum, default_value_t = DomainArg::Unit)]
    pub domain: DomainArg,

    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub mechanism: String,

    /// anonymity, strategyproofness, pareto_efficiency, ex_post_efficiency,
    /// proportionality, strong_proportionality or spf.
    #[arg(long)]
    pub axiom: String,

    #[arg(long, value_enum, default_value_t = VariantArg::Det)]
    pub variant: VariantArg,

    #[command(flatten)]
    pub grid: GridArgs,

    /// Enumerate every labelled profile, not just sorted ones.
    #[arg(long)]
    pub exhaustive: bool,

    /// Largest coalition size for SPF.
    #[arg(long)]
    pub subset_cap: Option<usize>,

    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    #[arg(long, default_value_t = 6)]
    pub grid: i128,

    /// Mixing probability of the AverageOrRR row.
    #[arg(long, default_value = "1/2")]
    pub p: String,

    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub mechanism: String,

    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    #[arg(long, value_enum, default_value_t = DomainArg::Unit)]
    pub domain: DomainArg,

    /// Grid resolution for constraint generation.
    #[arg(long, default_value_t = 6)]
    pub grid: i128,
}

#[derive(Debug, Args)]
pub struct Prop1Args {
    /// Sample points t in (0, 1]; each contributes the profile (0, t).
    #[arg(value_delimiter = ',', default_values_t = ["1/2".to_string(), "1".to_string()])]
    pub points: Vec<String>,

    /// Also sweep every sorted phantom triple on the grid 1/m.
    #[arg(long)]
    pub sweep: Option<i128>,
}
