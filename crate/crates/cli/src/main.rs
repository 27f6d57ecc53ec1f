mod commands;
mod error;
mod num;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::CliError;
use crate::num::{parse_f64, parse_u128, parse_u32, parse_u64};
use crate::output::Format;

/// Moments of quadratic character sums over fundamental discriminants.
#[derive(Debug, Parser)]
#[command(name = "quadmoments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true, env = "QUADMOMENTS_THREADS", value_parser = parse_u64)]
    pub threads: Option<u64>,
    /// Work ceiling for moments, theta and square counts.
    #[arg(long, global = true, env = "QUADMOMENTS_BUDGET", value_parser = parse_u128)]
    pub budget: Option<u128>,
    /// Master seed for all Monte-Carlo draws (default 0x5eed; verify uses 20240601).
    #[arg(long, global = true, value_parser = parse_u64)]
    pub seed: Option<u64>,
    /// Discriminants per sieve segment.
    #[arg(long, global = true, value_parser = parse_u64)]
    pub segment_size: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List fundamental discriminants up to a bound.
    Discriminants(DiscriminantsArgs),
    /// Kronecker symbol (d/n) for one n or for every n up to a bound.
    Kronecker(KroneckerArgs),
    /// Character sum of chi_d up to Y: sharp, smoothed or as a prefix profile.
    Charsum(CharsumArgs),
    /// Moments of character sums over all fundamental d <= X.
    Moments(MomentsArgs),
    /// Theta values for one discriminant, or theta moments and the
    /// nonvanishing census over all d <= X.
    Theta(ThetaArgs),
    /// Weighted count of tuples with square product.
    Squarecount(SquarecountArgs),
    /// Volume of the pair-form polytope.
    Gamma(GammaArgs),
    /// Truncated Euler product for the arithmetic factor.
    Ck(CkArgs),
    /// Predicted leading constant for the k-th moment.
    Predict(PredictArgs),
    /// The real double integral I(X) for a list of log X values.
    Intreal(IntrealArgs),
    /// Run acceptance criteria and print one verdict per criterion.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DiscriminantsArgs {
    #[arg(long, value_parser = parse_u64)]
    pub max: u64,
    /// Discriminant cache file, read when it covers --max and (re)written otherwise.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("which").required(true).args(["n", "n_max"]))]
pub struct KroneckerArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub d: i64,
    #[arg(long, value_parser = parse_u64)]
    pub n: Option<u64>,
    #[arg(long, value_parser = parse_u64)]
    pub n_max: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CharsumArgs {
    /// A positive fundamental discriminant.
    #[arg(long, value_parser = parse_u64)]
    pub d: u64,
    #[arg(long, value_parser = parse_f64)]
    pub y: f64,
    /// Weighted sum with the reference bump supported on (Y, 2Y).
    #[arg(long, conflicts_with = "profile")]
    pub smoothed: bool,
    /// Every prefix sum S(1), ..., S(Y).
    #[arg(long)]
    pub profile: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    /// Discriminant bounds, comma separated; every X is paired with every Y.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_u64)]
    pub x: Vec<u64>,
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_u64)]
    pub y: Vec<u64>,
    #[arg(long, value_parser = parse_u32)]
    pub k: u32,
    /// Smoothed sums instead of sharp cutoffs.
    #[arg(long)]
    pub smoothed: bool,
    /// Skip the predicted constant (reported as NaN).
    #[arg(long)]
    pub no_predict: bool,
    #[arg(long, value_parser = parse_u64, default_value = "1e6")]
    pub prime_cutoff: u64,
    #[arg(long, value_parser = parse_u64, default_value = "4e6")]
    pub samples: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ThetaArgs {
    /// Evaluate theta(t, chi_d) for this discriminant.
    #[arg(long, value_parser = parse_u64, conflicts_with_all = ["x", "k", "census"], required_unless_present = "x")]
    pub d: Option<u64>,
    /// Bound for theta moments or the census.
    #[arg(long, value_parser = parse_u64)]
    pub x: Option<u64>,
    #[arg(long, value_parser = parse_u32, conflicts_with = "census")]
    pub k: Option<u32>,
    /// Values of t, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_f64, default_value = "1")]
    pub t: Vec<f64>,
    /// Count d <= X with |theta(1, chi_d)| above a threshold.
    #[arg(long, requires = "x")]
    pub census: bool,
    /// Census threshold (default: ten times the truncation tolerance).
    #[arg(long, value_parser = parse_f64, requires = "census")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    /// Kernel-class enumeration with exact rational weights.
    Exact,
    /// Brute force over every tuple.
    Oracle,
    /// Kernel-class enumeration in floating point, for large bounds.
    Float,
}

#[derive(Debug, Args, Serialize)]
pub struct SquarecountArgs {
    #[arg(long, value_parser = parse_u32)]
    pub k: u32,
    /// Per-coordinate bounds, comma separated (k values).
    #[arg(long, value_delimiter = ',', value_parser = parse_u64, required_unless_present = "fit")]
    pub bounds: Vec<u64>,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: CountMethod,
    /// Fit T(Y, ..., Y) / Y^{k/2} by a polynomial in log Y over a log grid.
    #[arg(long, conflicts_with = "bounds")]
    pub fit: bool,
    /// Grid runs from 10^grid_lo to 10^grid_hi.
    #[arg(long, value_parser = parse_f64, default_value = "2")]
    pub grid_lo: f64,
    #[arg(long, value_parser = parse_f64, default_value = "5")]
    pub grid_hi: f64,
    #[arg(long, value_parser = parse_u32, default_value = "4")]
    pub per_decade: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct GammaArgs {
    #[arg(long, value_parser = parse_u32)]
    pub k: u32,
    #[arg(long, value_parser = parse_u64, default_value = "4e6")]
    pub samples: u64,
    /// Constraint right-hand sides, comma separated (default all ones).
    #[arg(long, value_delimiter = ',', value_parser = parse_f64)]
    pub beta: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct CkArgs {
    #[arg(long, value_parser = parse_u32)]
    pub k: u32,
    #[arg(long, value_parser = parse_u64, default_value = "1e6")]
    pub prime_cutoff: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long, value_parser = parse_u32)]
    pub k: u32,
    #[arg(long, value_parser = parse_u64, default_value = "1e6")]
    pub prime_cutoff: u64,
    #[arg(long, value_parser = parse_u64, default_value = "4e6")]
    pub samples: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct IntrealArgs {
    /// Values of log X, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_f64, default_value = "10,100,1000,10000")]
    pub logx: Vec<f64>,
    #[arg(long, value_parser = parse_f64, default_value = "1e-6")]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// orthogonality, consistency, squarecount, polytope, theta, intreal or all.
    #[arg(default_value = "all")]
    pub suite: String,
    /// Discriminant bound for the orthogonality and determinism checks.
    #[arg(long, value_parser = parse_u64, default_value = "1e7")]
    pub x: u64,
}

fn dispatch(cmd: &Command, g: &Global) -> Result<commands::Outcome, CliError> {
    match cmd {
        Command::Discriminants(a) => commands::discriminants(a, g),
        Command::Kronecker(a) => commands::kronecker(a),
        Command::Charsum(a) => commands::charsum(a),
        Command::Moments(a) => commands::moments(a, g),
        Command::Theta(a) => commands::theta(a, g),
        Command::Squarecount(a) => commands::squarecount(a, g),
        Command::Gamma(a) => commands::gamma(a, g),
        Command::Ck(a) => commands::ck(a),
        Command::Predict(a) => commands::predict(a, g),
        Command::Intreal(a) => commands::intreal(a),
        Command::Verify(a) => commands::verify(a, g),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        if t == 0 {
            return Err(CliError::usage("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build_global()
            .map_err(CliError::internal)?;
    }
    if g.segment_size == Some(0) {
        return Err(CliError::usage("--segment-size must be >= 1"));
    }
    let outcome = dispatch(&cli.command, g)?;
    let mut out: Box<dyn Write> = match &g.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    outcome.write(g.format, &mut *out)?;
    out.flush()?;
    Ok(if outcome.succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return CliError::usage(first).report();
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => e.report(),
    }
}
