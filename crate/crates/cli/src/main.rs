mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gmnf_core::NumericMode;

use report::{RunReport, EXIT_OK, EXIT_USAGE};

/// Min-sum belief propagation for generalized min-cost network flow.
#[derive(Parser, Debug)]
#[command(name = "gmnf", version, about)]
struct Cli {
    /// Print the run report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check structure and ratio-balance of an instance.
    Validate {
        instance: PathBuf,
        /// Cross-check with exhaustive cycle enumeration.
        #[arg(long)]
        bruteforce: bool,
    },
    /// Write a random ratio-balanced instance.
    Generate(GenerateArgs),
    /// Solve with BP, the exact oracle, or both.
    Solve(SolveArgs),
    /// Residual-network quantities at a flow: sigma, L, T and the iteration bound.
    Analyze {
        instance: PathBuf,
        /// Flow file (array or {"flow": [...]}).
        #[arg(long, conflicts_with = "oracle", required_unless_present = "oracle")]
        flow: Option<PathBuf>,
        /// Use the oracle optimum as the flow.
        #[arg(long)]
        oracle: bool,
    },
    /// Compare BP against computation-tree optima.
    TreeCheck {
        instance: PathBuf,
        /// Edge id or `all`.
        #[arg(long, default_value = "all")]
        edge: String,
        /// Depth `N` or inclusive range `A..B`.
        #[arg(long, default_value = "1..5")]
        depth: String,
        /// Print each computation tree.
        #[arg(long)]
        dump_tree: bool,
    },
    /// Oracle optimum, iteration bound, then BP for exactly that many iterations.
    Certify {
        instance: PathBuf,
        /// Refuse bounds above this many iterations.
        #[arg(long, default_value_t = gmnf_core::certify::MAX_CERTIFY_ITERATIONS)]
        max_iterations: u64,
    },
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub vertices: usize,
    #[arg(long)]
    pub edges: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Inclusive integer range `LO..HI`.
    #[arg(long, default_value = "2..4")]
    pub capacity: String,
    /// Inclusive integer range `LO..HI`.
    #[arg(long, default_value = "-5..5")]
    pub cost: String,
    /// Require an oracle-certified unique optimum.
    #[arg(long)]
    pub unique: bool,
    /// All coefficient magnitudes equal to one.
    #[arg(long)]
    pub unit: bool,
    /// Tree-shaped graph (edges = vertices - 1).
    #[arg(long)]
    pub acyclic: bool,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Bp,
    Oracle,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BeliefArg {
    Default,
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TieArg {
    Midpoint,
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    EdgeCost,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NumericArg {
    Rational,
    Float,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "bp")]
    pub method: Method,
    /// Run exactly this many BP iterations.
    #[arg(long, conflicts_with = "auto")]
    pub iterations: Option<usize>,
    /// Stop when the decoded flow is stable (the default).
    #[arg(long)]
    pub auto: bool,
    /// Stable iterations required by `--auto` (default: vertex count).
    #[arg(long)]
    pub window: Option<usize>,
    /// Iteration limit for `--auto`.
    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,
    #[arg(long, value_enum, default_value = "default")]
    pub belief_convention: BeliefArg,
    #[arg(long, value_enum, default_value = "midpoint")]
    pub tie: TieArg,
    #[arg(long, value_enum, default_value = "edge-cost")]
    pub init: InitArg,
    #[arg(long, value_enum, default_value = "rational")]
    pub numeric: NumericArg,
    /// Absolute comparison tolerance in float mode.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Print the final messages.
    #[arg(long)]
    pub dump_messages: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    let start = Instant::now();
    let (name, numeric, result) = match &cli.command {
        Command::Validate { instance, bruteforce } => {
            ("validate", NumericMode::Rational, commands::validate(instance, *bruteforce))
        }
        Command::Generate(args) => ("generate", NumericMode::Rational, commands::generate(args)),
        Command::Solve(args) => {
            let mode = match args.numeric {
                NumericArg::Rational => NumericMode::Rational,
                NumericArg::Float => NumericMode::Float,
            };
            ("solve", mode, commands::solve(args))
        }
        Command::Analyze { instance, flow, oracle } => {
            ("analyze", NumericMode::Rational, commands::analyze(instance, flow.as_deref(), *oracle))
        }
        Command::TreeCheck { instance, edge, depth, dump_tree } => (
            "tree-check",
            NumericMode::Rational,
            commands::tree_check(instance, edge, depth, *dump_tree),
        ),
        Command::Certify { instance, max_iterations } => {
            ("certify", NumericMode::Rational, commands::certify(instance, *max_iterations))
        }
    };
    match result {
        Ok((fingerprint, outcome)) => {
            let report = RunReport { command: name, fingerprint, numeric, outcome, wall_time: start.elapsed() };
            if cli.json {
                println!("{}", report.to_json());
            } else if name == "generate" && report.fingerprint.is_none() {
                print!("{}", report.outcome.text);
            } else {
                println!("{}", report.to_text());
            }
            ExitCode::from(report.outcome.code as u8)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code as u8)
        }
    }
}
