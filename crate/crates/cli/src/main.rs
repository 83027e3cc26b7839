//! `tracecalc`: transforms, moments, generating functions and Monte Carlo
//! experiments for trace polynomials on unitary and general linear groups.

mod cache;
mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Parser, Serialize)]
#[command(name = "tracecalc", version, about, propagate_version = true)]
struct Cli {
    /// Master seed; every random draw derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Memo cache file [default: $XDG_CACHE_HOME/tracecalc/heat-memo.json].
    #[arg(long, global = true, env = "TRACECALC_CACHE")]
    cache: Option<PathBuf>,

    /// Neither read nor write the memo cache.
    #[arg(long, global = true)]
    no_cache: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Heat flow of a trace polynomial, in the large-N limit or at finite N.
    Transform(TransformArgs),
    /// Moments of tr U^k under the heat kernel, finite N or the limit.
    Moments(MomentsArgs),
    /// Preimage of z^k under the free Hall transform.
    Inverse(InverseArgs),
    /// Coefficients of the generating-function polynomials p_k^{s,t}.
    Genfun(GenfunArgs),
    /// Monte Carlo experiments on Brownian motion in U(N) or GL(N).
    Mc(McArgs),
    /// Run one verification suite; exits 1 if it fails.
    Verify(VerifyArgs),
    /// Run the full acceptance suite; exits 1 if any criterion fails.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("input").required(true).args(["power", "poly"])))]
#[command(group(ArgGroup::new("target").required(true).args(["n", "limit"])))]
struct TransformArgs {
    /// Transform u^k.
    #[arg(long, value_name = "K")]
    power: Option<u32>,

    /// Trace polynomial in canonical JSON, or @path to a JSON file.
    #[arg(long, value_name = "JSON")]
    poly: Option<String>,

    /// Time: exact rational such as 1 or 3/2, or a decimal with --float.
    #[arg(long)]
    t: String,

    /// Accept t as a floating-point number.
    #[arg(long)]
    float: bool,

    /// Matrix size for the finite-N heat flow.
    #[arg(long = "N", value_name = "N")]
    n: Option<u32>,

    /// Large-N limit.
    #[arg(long)]
    limit: bool,

    /// Write the result as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct MomentsArgs {
    /// Largest k.
    #[arg(long)]
    kmax: u32,

    /// Time: exact rational, or a decimal with --float.
    #[arg(long)]
    t: String,

    #[arg(long)]
    float: bool,

    /// Matrix size, or "inf" for the limit.
    #[arg(long = "N", value_name = "N|inf", default_value = "inf")]
    n: String,

    /// Write the table as CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct InverseArgs {
    #[arg(long, value_name = "K")]
    power: u32,

    /// Time: exact rational, or a decimal with --float.
    #[arg(long)]
    t: String,

    #[arg(long)]
    float: bool,

    /// Write the result as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct GenfunArgs {
    #[arg(long)]
    s: f64,

    #[arg(long)]
    t: f64,

    /// Truncation order K.
    #[arg(long, default_value_t = tracecalc::series::DEFAULT_ORDER)]
    order: usize,

    /// Also report the three PDE residuals (diagnostic only).
    #[arg(long)]
    pde: bool,

    /// Write the p_k table as CSV here; PDE reports go to <stem>-pde.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Experiment {
    /// Mean and variance of tr(U^k).
    Trace,
    /// Mean of |tr(Z^k) − 1|².
    Deviation,
    /// Squared L² distance between the finite-N heat flow of u² and its
    /// limit transform (GL only).
    L2,
}

#[derive(Debug, Args, Serialize)]
struct McArgs {
    #[arg(long, value_enum, default_value = "trace")]
    experiment: Experiment,

    /// u or gl.
    #[arg(long, default_value = "u")]
    group: String,

    /// Matrix sizes, comma separated.
    #[arg(long = "N", value_name = "N,...", value_delimiter = ',', default_value = "4")]
    n: Vec<usize>,

    #[arg(long, default_value_t = 1.0)]
    t: f64,

    /// Time step.
    #[arg(long, default_value_t = 0.01)]
    h: f64,

    #[arg(long, default_value_t = 10_000)]
    paths: usize,

    /// Powers k, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    k: Vec<u32>,

    /// Write the rows as CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Suite {
    Magic,
    Laplacian,
    Oracle,
    Concentration,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
}

#[derive(Debug, Args, Serialize)]
struct SelftestArgs {
    /// Skip the Monte Carlo criterion.
    #[arg(long)]
    skip_mc: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let flags = serde_json::to_value(cli).expect("flags serialize");
    let cache_path = if cli.no_cache {
        None
    } else {
        cli.cache.clone().or_else(cache::default_path)
    };
    let engine = commands::open_engine(cache_path.as_deref());
    let known = engine.entries().len();
    let name = match &cli.command {
        Command::Transform(_) => "transform",
        Command::Moments(_) => "moments",
        Command::Inverse(_) => "inverse",
        Command::Genfun(_) => "genfun",
        Command::Mc(_) => "mc",
        Command::Verify(_) => "verify",
        Command::Selftest(_) => "selftest",
    };
    let ctx = manifest::Run::new(name, flags, cli.seed);
    let result = match &cli.command {
        Command::Transform(a) => commands::transform(&ctx, &engine, a),
        Command::Moments(a) => commands::moments(&ctx, &engine, a),
        Command::Inverse(a) => commands::inverse(&ctx, &engine, a),
        Command::Genfun(a) => commands::genfun(&ctx, &engine, a),
        Command::Mc(a) => commands::mc(&ctx, &engine, a),
        Command::Verify(a) => commands::verify(&ctx, &engine, a),
        Command::Selftest(a) => commands::selftest(&ctx, &engine, a),
    };
    if let Some(path) = &cache_path {
        if engine.entries().len() > known {
            if let Err(e) = cache::save(path, &engine) {
                eprintln!("warning: could not write cache {}: {e}", path.display());
            }
        }
    }
    result
}
