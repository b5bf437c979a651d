//! Command-line front end: `evaluate`, `audit`, `welfare` and `bench`.
//!
//! [`run`] parses arguments, executes one command and returns the process
//! exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | internal error or failing external rule |
//! | 2 | unparsable arguments, configuration or ballots |
//! | 3 | request infeasible for the electorate size |
//! | 4 | evaluators disagree |
//! | 5 | an audited axiom fails (the report is still printed) |
//! | 6 | `G` is not invertible for the requested prior |
//!
//! All JSON output carries `"schema": 1`.

pub mod ballots;
pub mod bench;
pub mod blackbox;
mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;

pub const SCHEMA_VERSION: u32 = 1;

pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const DISAGREEMENT: i32 = 4;
    pub const AUDIT_FAILURE: i32 = 5;
    pub const NOT_INVERTIBLE: i32 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => exit::PARSE,
            CliError::Io(_) => exit::INTERNAL,
            CliError::Lib(e) => match e {
                Error::TooManyVoters { .. }
                | Error::Infeasible { .. }
                | Error::AbstentionNotSupported(_)
                | Error::QuadratureNonConvergence { .. } => exit::INFEASIBLE,
                Error::Disagreement { .. } | Error::MalformedPhantom(_) => exit::DISAGREEMENT,
                Error::NotStrictlyIncreasing { .. } => exit::NOT_INVERTIBLE,
                Error::UnsoundWitness(_) | Error::RuleFailure(_) => exit::INTERNAL,
                _ => exit::PARSE,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spvote", version, about = "Strategy-proof voting rules on an interval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a rule on a ballot file.
    Evaluate(EvaluateArgs),
    /// Audit a rule against voting axioms on a grid.
    Audit(AuditArgs),
    /// Estimate welfare or synthesize welfare-optimal rules.
    Welfare(WelfareArgs),
    /// Time the evaluators on random profiles (CSV output).
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RepresentationArg {
    Curve,
    Median,
    Direct,
    Maxmin,
    Issues,
    All,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    ballots: PathBuf,
    #[arg(long, value_enum, default_value = "curve")]
    representation: RepresentationArg,
    /// Omit timing fields so output is reproducible byte for byte.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[arg(long, conflicts_with = "black_box", required_unless_present = "black_box")]
    config: Option<PathBuf>,
    /// Shell command reading a ballot file on stdin and printing the outcome.
    #[arg(long)]
    black_box: Option<String>,
    /// Seconds allowed per black-box call.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    /// Lower end of the domain for black-box rules.
    #[arg(long, default_value_t = 0.0)]
    m: f64,
    /// Upper end of the domain for black-box rules.
    #[arg(long = "M", default_value_t = 1.0)]
    upper: f64,
    #[arg(long, default_value_t = 10)]
    grid_steps: usize,
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Comma-separated axioms, or `all`.
    #[arg(long, default_value = "all")]
    axioms: String,
    /// Audit over several electorate sizes.
    #[arg(long)]
    variable: bool,
    /// Electorate sizes for --variable.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    sizes: Vec<usize>,
    /// Sample when exhaustive enumeration is too large.
    #[arg(long)]
    sampled: bool,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PriorArg {
    Uniform,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct WelfareArgs {
    /// Rule configs to compare by Monte Carlo.
    #[arg(long)]
    config: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "uniform")]
    prior: PriorArg,
    /// CSV `x,density` for the custom prior.
    #[arg(long, required_if_eq("prior", "custom"))]
    density: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    m: f64,
    #[arg(long = "M", default_value_t = 1.0)]
    upper: f64,
    /// Norm exponent; `inf` for the max norm.
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated voter weights.
    #[arg(long)]
    weights: Option<String>,
    /// Print the minimax-optimal weighted phantoms.
    #[arg(long, conflicts_with = "optimal_curve")]
    minimax: bool,
    /// Print the ex-ante optimal grading curve for the prior.
    #[arg(long)]
    optimal_curve: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchCurveArg {
    Linear,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,8,12,16")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "curve,median,direct,maxmin,issues")]
    representations: Vec<String>,
    #[arg(long, value_enum, default_value = "linear")]
    curve: BenchCurveArg,
    #[arg(long, default_value_t = 5)]
    repeat: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = if shown {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return if shown { exit::OK } else { exit::PARSE };
        }
    };
    let result = match cli.command {
        Command::Evaluate(a) => commands::evaluate(&a, out),
        Command::Audit(a) => commands::audit(&a, out),
        Command::Welfare(a) => commands::welfare(&a, out),
        Command::Bench(a) => commands::bench(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            if let CliError::Lib(Error::NotStrictlyIncreasing { x_lo, x_hi, g_lo, g_hi }) = &e {
                let report = serde_json::json!({
                    "schema": SCHEMA_VERSION,
                    "error": "not_strictly_increasing",
                    "witness": { "x_lo": x_lo, "x_hi": x_hi, "g_lo": g_lo, "g_hi": g_hi },
                });
                let _ = writeln!(out, "{report:#}");
            }
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
