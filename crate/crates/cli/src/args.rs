use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coldchain::model_data::Dimensions;
use coldchain::solver::{BranchRule, NodeOrder};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "COLDCHAIN_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "coldchain", version, about = "Robust vaccine supply chain planning")]
pub struct Cli {
    /// Print structured JSON summaries on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Generate(GenerateArgs),
    /// Build and solve one instance.
    Solve(SolveArgs),
    /// Budget/max-order scenario grid and budget-cut sweep.
    Sensitivity(SensitivityArgs),
    /// Robust solves over a list of gamma values.
    GammaSweep(GammaSweepArgs),
    /// Check an instance, and optionally a solution against it.
    Validate(ValidateArgs),
    /// Objective decomposition across presets.
    Ladder(LadderArgs),
}

/// Where the instance comes from.
#[derive(Debug, Clone, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct Source {
    /// Instance JSON file.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Size preset, 1 to 15.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=15))]
    pub preset: Option<u8>,
    /// Explicit size `T,J,K,V[,S[,A]]`: periods, distribution centers,
    /// vaccination centers, vaccines, suppliers (3), age groups (10).
    #[arg(long, value_parser = parse_size)]
    pub size: Option<Dimensions>,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[command(flatten)]
    pub source: Source,
    /// Generator seed for `--preset` and `--size`.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Directory for output files [env: COLDCHAIN_OUT_DIR, default: .]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RobustArgs {
    /// Solve the robust counterpart.
    #[arg(long)]
    pub robust: bool,
    /// Budget of uncertainty; implies --robust. Values above 1 are clamped.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Deviation as a fraction of nominal budgets and max orders.
    #[arg(long, default_value_t = 0.1)]
    pub deviation: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Branching {
    MostFractional,
    FirstIndex,
    Pseudocost,
}

impl From<Branching> for BranchRule {
    fn from(b: Branching) -> Self {
        match b {
            Branching::MostFractional => BranchRule::MostFractional,
            Branching::FirstIndex => BranchRule::FirstIndex,
            Branching::Pseudocost => BranchRule::Pseudocost,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Order {
    BestBound,
    DepthFirst,
}

impl From<Order> for NodeOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::BestBound => NodeOrder::BestBound,
            Order::DepthFirst => NodeOrder::DepthFirst,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Relative optimality gap.
    #[arg(long, default_value_t = 1e-6)]
    pub gap: f64,
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Wall-clock limit per solve, seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long, value_enum, default_value_t = Branching::MostFractional)]
    pub branching: Branching,
    #[arg(long, value_enum, default_value_t = Order::BestBound)]
    pub node_order: Order,
    #[arg(long, default_value_t = 1e-7)]
    pub feasibility_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub integrality_tol: f64,
    /// Disable row/column scaling.
    #[arg(long)]
    pub no_scaling: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Include wall times in reports.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Output file [default: <out-dir>/instance.json]
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub robust: RobustArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Solution file [default: <out-dir>/solution.json]
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the model in MPS format.
    #[arg(long)]
    pub mps: Option<PathBuf>,
    /// Include the wall time in the solution file.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SensitivityMode {
    Grid,
    Sweep,
    Both,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub robust: RobustArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    #[arg(long, value_enum, default_value_t = SensitivityMode::Both)]
    pub mode: SensitivityMode,
    /// Perturbation size of the scenario grid.
    #[arg(long, default_value_t = 0.1)]
    pub magnitude: f64,
    /// Budget cut fractions of the sweep.
    #[arg(long, value_delimiter = ',', default_values_t = coldchain::analysis::DEFAULT_BUDGET_CUTS)]
    pub cuts: Vec<f64>,
    /// Re-solve infeasible sweep levels with a zero service floor.
    #[arg(long)]
    pub relax_service: bool,
}

#[derive(Debug, Args)]
pub struct GammaSweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0])]
    pub gammas: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub deviation: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Solution file written by `solve`.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Tolerance of the solution checks.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct LadderArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2, 3])]
    pub presets: Vec<u8>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub robust: RobustArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub report: ReportArgs,
}

fn parse_size(s: &str) -> Result<Dimensions, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    if !(4..=6).contains(&parts.len()) {
        return Err("expected T,J,K,V[,S[,A]]".into());
    }
    let mut d = Dimensions::case_study(parts[0], parts[1], parts[2], parts[3]);
    if let Some(&s) = parts.get(4) {
        d.n_suppliers = s;
    }
    if let Some(&a) = parts.get(5) {
        d.n_age_groups = a;
    }
    Ok(d)
}
