//! `asd`: run the tracking benchmarks, export traces and check invariants.

mod request;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use asd_core::asd::AsdError;
use asd_core::benchmarks::{build_scenario_with, run_scenario, ScenarioOverrides, ScenarioResult, CSV_COLUMNS};
use clap::{Parser, Subcommand};
use serde::Serialize;

use request::{FileConfig, Flags, RunRequest, Toggle};
use verify::{Status, Suite};

/// Exit code for requests that do not resolve to a valid scenario.
const EXIT_INVALID: u8 = 2;
/// Exit code for simulations that abort (divergence, non-finite values).
const EXIT_ABORT: u8 = 3;
/// Exit code when a run completes but an embedded invariant fails.
const EXIT_INVARIANT: u8 = 4;

#[derive(Parser)]
#[command(name = "asd", version, about = "ASD tracking control benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its traces and metrics.
    Run(RunArgs),
    /// Run invariant suites and print a report.
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario name (rohrs, nonlinear, twocart); same as --scenario.
    #[arg(value_name = "SCENARIO", conflicts_with = "scenario")]
    positional: Option<String>,
    #[arg(long)]
    scenario: Option<String>,
    /// Two-cart case (1, 2 or 3).
    #[arg(long)]
    case: Option<u8>,
    /// Reference: step or sine.
    #[arg(long = "ref")]
    reference: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    noise: Option<Toggle>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    suite: Suite,
    /// Shorter horizon for quick checks.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Written next to the CSV as `<stem>_metrics.json`.
#[derive(Serialize)]
struct Summary<'a> {
    scenario: String,
    case: Option<u8>,
    reference: String,
    dt: f64,
    horizon: f64,
    seed: u64,
    noise: bool,
    xi_bound: f64,
    metrics: &'a asd_core::Metrics,
    invariants: &'a asd_core::benchmarks::InvariantFlags,
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(contents)?;
    f.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn is_abort(e: &asd_core::Error) -> bool {
    matches!(e, asd_core::Error::Sim(_) | asd_core::Error::Asd(AsdError::Diverged { .. }))
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let file = match &args.config {
        Some(p) => match FileConfig::load(p) {
            Ok(f) => f,
            Err(msg) => {
                eprintln!("error: {msg}");
                return Ok(ExitCode::from(EXIT_INVALID));
            }
        },
        None => FileConfig::default(),
    };
    let flags = Flags {
        scenario: args.positional.or(args.scenario),
        case: args.case,
        reference: args.reference,
        dt: args.dt,
        horizon: args.horizon,
        seed: args.seed,
        noise: args.noise,
        out: args.out,
    };
    let req = match RunRequest::resolve(flags, file) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return Ok(ExitCode::from(EXIT_INVALID));
        }
    };
    let scenario = match build_scenario_with(req.scenario, req.case, &req.overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: invalid scenario: {e}");
            return Ok(ExitCode::from(EXIT_INVALID));
        }
    };
    let result: ScenarioResult = match run_scenario(&scenario, req.reference) {
        Ok(r) => r,
        Err(e) if is_abort(&e) => {
            eprintln!("error: simulation aborted: {e}");
            return Ok(ExitCode::from(EXIT_ABORT));
        }
        Err(e) => {
            eprintln!("error: invalid scenario: {e}");
            return Ok(ExitCode::from(EXIT_INVALID));
        }
    };

    fs::create_dir_all(&req.out).with_context(|| format!("creating {}", req.out.display()))?;
    let stem = req.stem();
    let csv_path = req.out.join(format!("{stem}.csv"));
    write_atomic(&csv_path, result.traces.to_csv(&CSV_COLUMNS)?.as_bytes())?;
    let summary = Summary {
        scenario: scenario.name.to_string(),
        case: scenario.case,
        reference: req.reference.to_string(),
        dt: scenario.config.dt,
        horizon: scenario.config.horizon,
        seed: scenario.config.rng_seed,
        noise: scenario.noise.is_some(),
        xi_bound: result.xi_bound,
        metrics: &result.metrics,
        invariants: &result.invariants,
    };
    let json_path = req.out.join(format!("{stem}_metrics.json"));
    write_atomic(&json_path, (serde_json::to_string_pretty(&summary)? + "\n").as_bytes())?;

    let m = &result.metrics;
    println!("{}", csv_path.display());
    println!(
        "settled sup |y-r| {:.4e}  rms {:.4e}  on [{}, {}]  sup |xi| {:.4} (bound {:.4})",
        m.settled_sup_error, m.settled_rms_error, m.window_start, m.window_end, m.sup_xi, result.xi_bound
    );
    if !result.invariants.all() {
        eprintln!("error: invariant check failed: {:?}", result.invariants);
        return Ok(ExitCode::from(EXIT_INVARIANT));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let overrides = ScenarioOverrides {
        dt: args.dt,
        horizon: args.horizon,
        seed: args.seed,
        ..Default::default()
    };
    let checks = match verify::run_suite(args.suite, &overrides) {
        Ok(c) => c,
        Err(e) if is_abort(&e) => {
            eprintln!("error: simulation aborted: {e}");
            return Ok(ExitCode::from(EXIT_ABORT));
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_INVALID));
        }
    };
    print!("{}", verify::render(&checks));
    if checks.iter().any(|c| c.status == Status::Fail) {
        Ok(ExitCode::FAILURE)
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
