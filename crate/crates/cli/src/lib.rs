//! Batch commands over the `banded_esd` toolkit.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 usage, 3 budget, 4 numerical
//! failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use banded_esd::combinatorics::{enumerate_canonical_trees, Limits};
use banded_esd::metrics::moment_report;
use banded_esd::moments::{
    degree_factor, format_rational, limit_moment_polynomial, moment_table_csv, parse_rational,
    tree_contribution, MomentError, MomentPolynomial,
};
use banded_esd::simulate::{
    ensemble_csv, ensemble_json, histogram, mean_moments, run_ensemble, Budget, EntryDistribution,
    SimulateError, SimulationConfig, DEFAULT_BINS, DEFAULT_MAX_ORDER,
};
use banded_esd::verify::{run_suite, Subject, Suite};
use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde::Serialize;

/// Overrides the worker count of simulation ensembles.
pub const THREADS_ENV: &str = "BANDED_ESD_THREADS";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "banded-esd",
    version,
    about = "Spectral moments of banded sample covariance matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limiting moments m_1..m_L under both ratio conventions.
    Moments(MomentsArgs),
    /// Monte Carlo ensemble with moment report and optional eigenvalue histogram.
    Simulate(SimulateArgs),
    /// Canonical trees with l edges and their moment contributions.
    Trees(TreesArgs),
    /// Oracle cross-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("ratio").required(true).args(["gamma", "y"])))]
pub struct MomentsArgs {
    #[arg(long)]
    pub lmax: u32,
    /// gamma = d/n, as a decimal or a/b.
    #[arg(long)]
    pub gamma: Option<String>,
    /// y = 2d/n; converted to gamma = y/2.
    #[arg(long)]
    pub y: Option<String>,
    /// Print exact fractions instead of decimals.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// normal, rademacher or uniform.
    #[arg(long, default_value = "normal")]
    pub dist: String,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Compute eigenvalues and write the pooled histogram.
    #[arg(long)]
    pub eig: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    pub lmax: u32,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Cap on p (d + 1) n reps.
    #[arg(long)]
    pub max_work: Option<u128>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TreesArgs {
    #[arg(long)]
    pub l: u32,
    /// One JSON object per line.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "fast")]
    pub suite: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Budget(SimulateError),
    #[error(transparent)]
    Numerical(SimulateError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Numerical(_) | CliError::Io { .. } => 4,
        }
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SimulateError> for CliError {
    fn from(e: SimulateError) -> Self {
        match e {
            SimulateError::BudgetExceeded { .. } => CliError::Budget(e),
            SimulateError::Solver { .. } => CliError::Numerical(e),
            SimulateError::InvalidConfig(_) | SimulateError::ZeroBins => {
                CliError::Usage(e.to_string())
            }
            SimulateError::NoEigenvalues => CliError::Numerical(e),
        }
    }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        context: "writing to stdout".into(),
        source,
    }
}

/// `banded-esd <args>` as typed, for output headers.
pub fn invocation(args: &[String]) -> String {
    std::iter::once("banded-esd")
        .chain(args.iter().skip(1).map(String::as_str))
        .collect::<Vec<_>>()
        .join(" ")
}

fn preamble(args: &[String]) -> Vec<String> {
    vec![
        format!("banded-esd {VERSION}"),
        format!("invocation: {}", invocation(args)),
    ]
}

/// Applies the thread override, if set. Must run before any parallel work.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Usage(format!("{THREADS_ENV}={value:?} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn polynomials(lmax: u32) -> Result<Vec<MomentPolynomial>, CliError> {
    let limits = Limits::default();
    (1..=lmax)
        .map(|l| limit_moment_polynomial(l, &limits).map_err(CliError::from))
        .collect()
}

fn moments(args: &MomentsArgs, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    if args.lmax == 0 {
        return Err(CliError::Usage("--lmax must be at least 1".into()));
    }
    let gamma = match (&args.gamma, &args.y) {
        (Some(g), None) => parse_rational(g)?,
        (None, Some(y)) => parse_rational(y)? / BigRational::from_integer(2.into()),
        _ => {
            return Err(CliError::Usage(
                "exactly one of --gamma and --y is required".into(),
            ))
        }
    };
    let polys = polynomials(args.lmax)?;
    let mut text = String::new();
    for line in preamble(argv) {
        text.push_str(&format!("# {line}\n"));
    }
    text.push_str(&moment_table_csv(&polys, &gamma, args.exact));
    out.write_all(text.as_bytes()).map_err(stdout_err)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

fn simulate(args: &SimulateArgs, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let distribution: EntryDistribution = args.dist.parse()?;
    let config = SimulationConfig {
        p: args.p,
        n: args.n,
        d: args.d,
        distribution,
        replicates: args.reps,
        seed: args.seed,
    };
    config.validate()?;
    let budget = args
        .max_work
        .map_or_else(Budget::default, |max_work| Budget { max_work });
    budget.check(&config)?;
    if args.eig && args.bins == 0 {
        return Err(CliError::Usage("--bins must be positive".into()));
    }
    let samples = run_ensemble(&config, args.lmax, args.eig, &budget)?;
    let header = preamble(argv);
    fs::create_dir_all(&args.out).map_err(|source| CliError::Io {
        context: format!("creating {}", args.out.display()),
        source,
    })?;
    write_file(
        &args.out,
        "ensemble.csv",
        &ensemble_csv(&config, &samples, &header),
    )?;
    write_file(
        &args.out,
        "ensemble.json",
        &to_json(&ensemble_json(&config, &samples, &header)),
    )?;

    let report = moment_report(
        &mean_moments(&samples),
        &polynomials(args.lmax)?,
        config.gamma(),
    )
    .expect("one polynomial per order");
    let mut report_csv: String = header.iter().map(|l| format!("# {l}\n")).collect();
    report_csv.push_str(&report.to_csv());
    write_file(&args.out, "moment_report.csv", &report_csv)?;

    let mut summary = format!(
        "p={} n={} d={} gamma={} y={} dist={} reps={} seed={}\n",
        config.p,
        config.n,
        config.d,
        config.gamma(),
        config.y(),
        config.distribution,
        config.replicates,
        config.seed
    );
    summary.push_str(&report.to_string());
    if args.eig {
        let hist = histogram(&samples, args.bins)?;
        write_file(&args.out, "histogram.csv", &hist.to_csv(&header))?;
        write_file(
            &args.out,
            "histogram.json",
            &to_json(&serde_json::json!({ "header": header, "histogram": hist })),
        )?;
        let lo = samples
            .iter()
            .filter_map(|s| s.lambda_min())
            .fold(f64::INFINITY, f64::min);
        let hi = samples
            .iter()
            .filter_map(|s| s.lambda_max())
            .fold(f64::NEG_INFINITY, f64::max);
        summary.push_str(&format!("lambda_min={lo} lambda_max={hi}\n"));
        summary.push_str("histogram moments:");
        for l in 1..=4 {
            summary.push_str(&format!(" m{l}={:.6}", hist.moment(l)));
        }
        summary.push('\n');
    }
    summary.push_str(&format!("wrote {}\n", args.out.display()));
    out.write_all(summary.as_bytes()).map_err(stdout_err)
}

#[derive(Serialize)]
struct TreeLine {
    index: usize,
    walk: String,
    child_counts: Vec<u32>,
    r: u32,
    profile: Vec<u32>,
    contribution: String,
}

fn trees(args: &TreesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let limits = Limits::default();
    let all =
        enumerate_canonical_trees(args.l, &limits).map_err(|e| CliError::Usage(e.to_string()))?;
    let factor = |d| degree_factor(d).value;
    let mut text = String::new();
    if !args.json {
        text.push_str("index,walk,r,profile,contribution\n");
    }
    for (index, tree) in all.enumerate() {
        let (r, product) = tree_contribution(&tree, &factor);
        let record = tree.to_record();
        let contribution = match r {
            0 => format_rational(&product),
            1 => format!("{}*g", format_rational(&product)),
            _ => format!("{}*g^{r}", format_rational(&product)),
        };
        if args.json {
            let line = TreeLine {
                index,
                walk: tree.to_string(),
                child_counts: record.child_counts,
                r,
                profile: record.profile,
                contribution,
            };
            text.push_str(&serde_json::to_string(&line).expect("plain data serializes"));
            text.push('\n');
        } else {
            let walk: Vec<String> = tree
                .canonical_walk()
                .iter()
                .map(ToString::to_string)
                .collect();
            let profile: Vec<String> = record.profile.iter().map(ToString::to_string).collect();
            text.push_str(&format!(
                "{index},{},{r},{},{contribution}\n",
                walk.join(" "),
                profile.join(" ")
            ));
        }
    }
    if !args.json {
        let poly = limit_moment_polynomial(args.l, &limits)?;
        text.push_str(&format!("# m_{} = {poly}\n", args.l));
    }
    out.write_all(text.as_bytes()).map_err(stdout_err)
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let suite: Suite = args.suite.parse().map_err(CliError::Usage)?;
    let report = run_suite(suite, &Subject::default());
    writeln!(out, "{report}").map_err(stdout_err)?;
    if report.all_passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name).collect();
        Err(CliError::Verification(names.join(", ")))
    }
}

/// Runs a parsed command; `argv` is only used for output headers.
pub fn execute(cli: &Cli, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Moments(a) => moments(a, argv, out),
        Command::Simulate(a) => simulate(a, argv, out),
        Command::Trees(a) => trees(a, out),
        Command::Verify(a) => verify(a, out),
    }
}
