mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linform::sim::{OffsetSpec, QuantityRequest};
use linform::{Exponent, LinearForm};

/// Random images of integer linear forms: exact counts, predictions and simulation.
#[derive(Debug, Parser)]
#[command(name = "linform", version, propagate_version = true)]
struct Cli {
    /// Worker threads for parallel trials (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Leading-order prediction for |L(A)| and |L(A)^c|.
    Predict(PredictArgs),
    /// List or count the L-expressions at an offset.
    Enumerate(EnumerateArgs),
    /// Image size and representation counts for one subset.
    Count(CountArgs),
    /// Monte-Carlo sweep described by command-line flags.
    Simulate(SimulateArgs),
    /// Monte-Carlo sweep described by a JSON config file.
    Sweep(SweepArgs),
    /// Poisson approximation diagnostics for W_k.
    Poisson(PoissonArgs),
    /// Frequency of sets with more sums than differences.
    Mstd(MstdArgs),
    /// Quadrature against the closed form for binary critical complements.
    IdentityCheck(IdentityArgs),
}

/// Nonnegative integer, also accepting integral scientific notation such as `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) => Ok(x as u64),
        _ => Err(format!("{s:?} is not a nonnegative integer")),
    }
}

fn parse_positive_count(s: &str) -> Result<u64, String> {
    match parse_count(s)? {
        0 => Err("must be at least 1".into()),
        v => Ok(v),
    }
}

fn parse_form(s: &str) -> Result<LinearForm, String> {
    s.parse().map_err(|e: linform::FormError| e.to_string())
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse().map_err(|e: linform::TheoryError| e.to_string())
}

fn parse_offset(s: &str) -> Result<OffsetSpec, String> {
    if s.trim() == "mid" {
        Ok(OffsetSpec::Mid)
    } else {
        parse_count(s).map(OffsetSpec::At)
    }
}

fn parse_quantity(s: &str) -> Result<QuantityRequest, String> {
    serde_json::from_value(serde_json::Value::String(s.trim().into()))
        .map_err(|_| format!("unknown quantity {s:?}; expected image_size, complement_size, w_k or tv_diagnostics"))
}

#[derive(Debug, Args)]
struct FormArg {
    /// Coefficients, comma separated, e.g. `1,1,-1`.
    #[arg(long, value_parser = parse_form, allow_hyphen_values = true)]
    form: LinearForm,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    form: FormArg,
    /// Decay exponent of p = c N^-alpha, as a fraction `a/b` or a decimal.
    #[arg(long, value_parser = parse_exponent)]
    alpha: Option<Exponent>,
    /// Multiplier c used with --alpha.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Sit exactly on the threshold with this multiplier.
    #[arg(long)]
    critical_c: Option<f64>,
    /// Range parameter; required with --alpha.
    #[arg(long = "N", value_parser = parse_count)]
    n: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    form: FormArg,
    #[arg(long = "N", value_parser = parse_count)]
    n: u64,
    /// Offset k, so the target value is -dN + k.
    #[arg(long, value_parser = parse_count, required_unless_present = "all_k", conflicts_with = "all_k")]
    k: Option<u64>,
    /// Every offset 0..=mN.
    #[arg(long)]
    all_k: bool,
    /// Only report |D(N, k)|.
    #[arg(long)]
    count_only: bool,
    /// Output format (default: json for one offset, csv for --all-k).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Largest number of classes to list.
    #[arg(long, value_parser = parse_count, default_value_t = linform::enumeration::ENUMERATION_CAP)]
    cap: u64,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    form: FormArg,
    #[arg(long = "N", value_parser = parse_count)]
    n: u64,
    /// Explicit subset of {0..N}, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_count, conflicts_with = "p")]
    elements: Option<Vec<u64>>,
    /// Sample a binomial subset with this inclusion probability.
    #[arg(long, required_unless_present = "elements")]
    p: Option<f64>,
    /// Seed for sampling; generated and printed when omitted.
    #[arg(long, value_parser = parse_count)]
    seed: Option<u64>,
    /// Offsets at which to report W_k (integers or `mid`).
    #[arg(long, value_delimiter = ',', value_parser = parse_offset)]
    k: Vec<OffsetSpec>,
    /// Require pairwise distinct summands.
    #[arg(long)]
    distinct: bool,
    /// Also write the image as CSV (value,present).
    #[arg(long)]
    image_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Directory for result files the config does not name.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write a Python plotting script next to the trials CSV.
    #[arg(long)]
    emit_plot: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    form: FormArg,
    /// Range parameters, comma separated.
    #[arg(long = "N", value_delimiter = ',', value_parser = parse_count, required = true)]
    n: Vec<u64>,
    /// Multipliers c, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    c: Vec<f64>,
    /// Decay exponents, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_exponent, required = true)]
    alpha: Vec<Exponent>,
    #[arg(long, value_parser = parse_positive_count)]
    trials: u64,
    /// Master seed; generated and printed when omitted.
    #[arg(long, value_parser = parse_count)]
    seed: Option<u64>,
    /// Quantities to record.
    #[arg(long, value_delimiter = ',', value_parser = parse_quantity, default_value = "image_size,complement_size")]
    quantities: Vec<QuantityRequest>,
    /// Offsets for W_k statistics (integers or `mid`).
    #[arg(long, value_delimiter = ',', value_parser = parse_offset)]
    k: Vec<OffsetSpec>,
    #[arg(long)]
    distinct: bool,
    /// Save the resolved configuration here for later `sweep` runs.
    #[arg(long)]
    save_config: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Experiment config (JSON, `"schema": 1`).
    config: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    #[command(flatten)]
    form: FormArg,
    #[arg(long = "N", value_parser = parse_count)]
    n: u64,
    /// Offset (integer or `mid`).
    #[arg(long, value_parser = parse_offset, default_value = "mid")]
    k: OffsetSpec,
    #[arg(long, value_parser = parse_exponent)]
    alpha: Exponent,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, value_parser = parse_positive_count)]
    trials: u64,
    #[arg(long, value_parser = parse_count)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct MstdArgs {
    #[arg(long = "N", value_parser = parse_count)]
    n: u64,
    /// Inclusion probability.
    #[arg(long)]
    p: f64,
    #[arg(long, value_parser = parse_positive_count)]
    trials: u64,
    #[arg(long, value_parser = parse_count)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    /// Leading coefficient; with --u2 and --c checks one case instead of the default panel.
    #[arg(long, allow_hyphen_values = true, requires_all = ["u2", "c"])]
    u1: Option<i64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["u1", "c"])]
    u2: Option<i64>,
    #[arg(long, requires_all = ["u1", "u2"])]
    c: Option<f64>,
    /// Largest acceptable residual.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Predict(a) => commands::predict(a),
        Command::Enumerate(a) => commands::enumerate(a),
        Command::Count(a) => commands::count(a),
        Command::Simulate(a) => commands::simulate(a, cli.workers),
        Command::Sweep(a) => commands::sweep(a, cli.workers),
        Command::Poisson(a) => commands::poisson(a),
        Command::Mstd(a) => commands::mstd(a),
        Command::IdentityCheck(a) => commands::identity_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
