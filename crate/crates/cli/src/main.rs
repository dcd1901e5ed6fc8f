//! `edo`: command-line harness for evolutionary diversity optimisation.

mod commands;
mod config;
mod lists;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "edo", version, about = "Evolutionary diversity optimisation on permutation problems")]
struct Cli {
    /// Flat `key = value` file whose keys are long flag names of the
    /// subcommand; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the algorithm once and print a summary CSV row.
    Run(RunArgs),
    /// Steps to maximum diversity from a duplicated start, per μ and measure.
    ExperimentUnconstrained(UnconstrainedArgs),
    /// Percentage of the μn² budget used, over a grid of n, μ and operator.
    ExperimentHeatmap(HeatmapArgs),
    /// Final diversity under a quality threshold (1+α)·OPT.
    ExperimentConstrained(ConstrainedArgs),
    /// Write a constructed population to a file or stdout.
    Construct(ConstructArgs),
    /// Report count statistics and check whether a population is a local optimum.
    Verify(VerifyArgs),
    /// Tabulate improvement-probability bounds.
    Bounds(BoundsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Init {
    /// μ copies of a uniformly random solution.
    Random,
    /// μ copies of the known optimum.
    Opt,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ProblemArg {
    Qap,
    Stsp,
    Atsp,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct RunArgs {
    /// QAPLIB `.dat` instance.
    #[arg(long, conflicts_with = "synthetic_n")]
    instance: Option<PathBuf>,
    /// QAPLIB `.sln` file for the instance.
    #[arg(long, requires = "instance")]
    solution: Option<PathBuf>,
    /// Size of a synthetic instance generated from the seed.
    #[arg(long)]
    synthetic_n: Option<usize>,
    /// Problem of a synthetic instance. STSP and ATSP use unit distances.
    #[arg(long, value_enum, default_value = "qap")]
    problem: ProblemArg,
    #[arg(long)]
    mu: usize,
    /// Accept offspring costing at most (1+α)·OPT.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value = "n")]
    measure: String,
    #[arg(long, default_value = "2opt")]
    operator: String,
    /// Iteration limit; defaults to μn².
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "random")]
    tie_break: String,
    /// Evenly spaced trajectory checkpoints besides iteration 0.
    #[arg(long, default_value_t = 1000)]
    checkpoints: usize,
    #[arg(long, value_enum, default_value = "random", conflicts_with = "population")]
    init: Init,
    /// Start from the population in this file.
    #[arg(long)]
    population: Option<PathBuf>,
    /// Keep iterating after the driven measure reaches its optimum.
    #[arg(long)]
    no_early_stop: bool,
    /// Directory for trajectory.csv, summary.csv and final_population.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct UnconstrainedArgs {
    /// Comma-separated QAPLIB `.dat` files.
    #[arg(long)]
    instance: Option<String>,
    /// Sizes of synthetic QAP instances, e.g. `10,20` or `10:30:10`.
    #[arg(long)]
    synthetic_n: Option<String>,
    #[arg(long, default_value = "3,10,20,50")]
    mu: String,
    #[arg(long, default_value = "n,d")]
    measure: String,
    #[arg(long, default_value = "2opt")]
    operator: String,
    #[arg(long, default_value_t = 30)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 100)]
    checkpoints: usize,
    #[arg(long, default_value = "random")]
    tie_break: String,
    #[arg(long, default_value = "results/unconstrained")]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct HeatmapArgs {
    #[arg(long, default_value = "20:120:5")]
    synthetic_n: String,
    #[arg(long, default_value = "5:120:5")]
    mu: String,
    /// Operators; `kopt:n/5` means ⌈n/5⌉-opt.
    #[arg(long, default_value = "2opt,3opt,4opt,kopt:n/5")]
    operator: String,
    #[arg(long, default_value_t = 30)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "random")]
    tie_break: String,
    #[arg(long, default_value = "results/heatmap")]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct ConstrainedArgs {
    /// Comma-separated QAPLIB `.dat` files.
    #[arg(long)]
    instance: String,
    /// Comma-separated `.sln` files in the same order; by default the `.sln`
    /// next to each instance.
    #[arg(long)]
    solution: Option<String>,
    #[arg(long, default_value = "3,10,20,50")]
    mu: String,
    #[arg(long, default_value = "0.05,0.2,0.5,1")]
    alpha: String,
    #[arg(long, default_value = "n,d")]
    measure: String,
    #[arg(long, default_value = "2opt")]
    operator: String,
    #[arg(long, default_value_t = 30)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value = "random")]
    tie_break: String,
    #[arg(long, default_value = "results/constrained")]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Construction {
    /// Balanced QAP population (all assignment counts within one).
    QapMax,
    /// STSP population with maximum edge diversity.
    StspMax,
    /// ATSP population with maximum arc diversity.
    AtspMax,
    /// QAP population that no 2-opt step improves although d_P = 2.
    QapTrap,
    /// STSP population that no 3-opt insertion step improves.
    Stsp3Trap,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct ConstructArgs {
    #[arg(value_enum)]
    kind: Construction,
    #[arg(long)]
    n: usize,
    /// Population size (ignored by the trap constructions).
    #[arg(long)]
    mu: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct VerifyArgs {
    #[arg(long)]
    population: PathBuf,
    #[arg(long)]
    operator: String,
    /// Measures to check; both by default.
    #[arg(long, default_value = "n,d")]
    measure: String,
    /// Largest number of candidate populations to scan.
    #[arg(long, default_value_t = edo_core::construct::DEFAULT_CAP)]
    cap: u128,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct BoundsArgs {
    #[arg(long)]
    operator: String,
    /// Resolves `2opt`/`3opt`/`4opt`; QAP unless given.
    #[arg(long, default_value = "qap")]
    problem: String,
    #[arg(long)]
    n: String,
    #[arg(long)]
    mu: String,
    /// Largest counts to tabulate; 2..=μ by default.
    #[arg(long)]
    d_p: Option<String>,
}

fn main() -> anyhow::Result<()> {
    let args = config::expand_config(std::env::args_os().collect())?;
    let cli = Cli::parse_from(args);
    match cli.command {
        Command::Run(a) => commands::run(a),
        Command::ExperimentUnconstrained(a) => commands::unconstrained(a),
        Command::ExperimentHeatmap(a) => commands::heatmap(a),
        Command::ExperimentConstrained(a) => commands::constrained(a),
        Command::Construct(a) => commands::construct(a),
        Command::Verify(a) => commands::verify(a),
        Command::Bounds(a) => commands::bounds(a),
    }
}
