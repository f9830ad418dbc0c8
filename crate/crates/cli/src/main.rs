//! `predictive`: simulate strategies, enumerate their finite-dimensional
//! laws, and run verification manifests.
//!
//! Exit status: 0 on success or when every check matched its expectation,
//! 1 on runtime errors and unexpected verdicts, 2 on usage and configuration
//! errors.

mod common;
mod enumerate;
mod manifest;
mod report;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use predictive::verify::CheckKind;

use common::{parse_tolerances, usage, LoadedSpec, Usage};
use manifest::{load_manifest, Expect};
use verify::Overrides;

#[derive(Debug, Parser)]
#[command(name = "predictive", version, about = "Predictive-strategy simulation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate seeded paths and summarise them.
    Simulate(SimulateArgs),
    /// Run checks and compare their verdicts with the expected ones.
    Verify(VerifyArgs),
    /// Tabulate the law of (X_1, .., X_n) for a categorical strategy.
    Enumerate(EnumerateArgs),
    /// Combine earlier JSON outputs into one table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Spec file (TOML or JSON) or an inline spec.
    #[arg(long)]
    strategy: String,
    /// Path length.
    #[arg(long)]
    n: usize,
    /// Number of paths.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["strategy", "manifest"]))]
struct VerifyArgs {
    /// Spec file or inline spec, checked with --check.
    #[arg(long)]
    strategy: Option<String>,
    /// Manifest file, `builtin:theorems` or `builtin:counterexamples`.
    #[arg(long)]
    manifest: Option<String>,
    /// Check kind for --strategy; repeatable. Defaults to every exact check
    /// for categorical strategies and the quadrature check on the line.
    #[arg(long = "check", conflicts_with = "manifest")]
    checks: Vec<String>,
    /// Verdict expected of --strategy checks.
    #[arg(long, default_value = "pass", conflicts_with = "manifest")]
    expect: String,
    /// Horizon; overrides the manifest.
    #[arg(long)]
    n: Option<usize>,
    /// Monte Carlo sample size; overrides the manifest.
    #[arg(long)]
    reps: Option<usize>,
    /// Seed of stochastic checks; overrides the manifest.
    #[arg(long)]
    seed: Option<u64>,
    /// `name=value` with name one of exact, quadrature, cf, inner; repeatable.
    #[arg(long = "tolerance")]
    tolerances: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long)]
    strategy: String,
    /// Horizon.
    #[arg(long)]
    n: usize,
    /// Directory for law.json and law.csv; the JSON goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Output files or directories of earlier runs.
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn check_kind(name: &str) -> Result<CheckKind> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| usage(format!("unknown check kind \"{name}\"")))
}

fn run_verify(a: VerifyArgs) -> Result<bool> {
    let ov = Overrides {
        horizon: a.n,
        samples: a.reps,
        seed: a.seed,
        tolerances: parse_tolerances(&a.tolerances)?,
    };
    let lm = match (&a.manifest, &a.strategy) {
        (Some(m), _) => load_manifest(m)?,
        (None, Some(s)) => {
            let expect = match a.expect.as_str() {
                "pass" => Expect::Pass,
                "fail" => Expect::Fail,
                other => return Err(usage(format!("--expect must be pass or fail, not {other}"))),
            };
            let kinds = a.checks.iter().map(|k| check_kind(k)).collect::<Result<Vec<_>>>()?;
            verify::ad_hoc(&LoadedSpec::from_arg(s)?, &kinds, a.n.unwrap_or(3), expect)?
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    let (outcomes, doc) = verify::run(&lm, &ov, a.out.as_deref())?;
    for o in &outcomes {
        println!("{}", verify::outcome_line(o));
    }
    let matched = outcomes.iter().filter(|o| o.matched).count();
    println!("{matched}/{} checks as expected (config {})", outcomes.len(), doc["config_hash"].as_str().unwrap_or(""));
    Ok(matched == outcomes.len())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(a) => {
            let spec = LoadedSpec::from_arg(&a.strategy)?;
            let summary = simulate::run(&spec, a.n, a.reps, a.seed, &a.out)?;
            println!("{}", serde_json::to_string_pretty(&summary["summary"])?);
            Ok(true)
        }
        Command::Verify(a) => run_verify(a),
        Command::Enumerate(a) => {
            let spec = LoadedSpec::from_arg(&a.strategy)?;
            let doc = enumerate::run(&spec, a.n, a.out.as_deref())?;
            if a.out.is_none() {
                println!("{}", serde_json::to_string_pretty(&doc)?);
            }
            Ok(true)
        }
        Command::Report(a) => {
            let (rows, ok) = report::run(&a.inputs, a.out.as_deref())?;
            for r in &rows {
                println!("{:<9} {:<10} {:<40} {:<16} {:>3}  {}", r.status, r.kind, r.name, r.family, r.horizon, r.value);
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
