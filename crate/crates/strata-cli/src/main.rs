//! Batch front-end for the strata engine: runs declarative chart
//! scenarios, emits golden operation tables, and self-checks the
//! built-in verification suite with optional fault injection.

mod selfcheck;
mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use strata::fault::{inject, Fault, FaultGuard};
use strata::foliation::{
    available_checks, run_scenario, CheckStatus, FoliationError, Report, Scenario,
};

// ---- command-line surface ----

/// Exact verification runs for transferred homotopy structures on
/// polynomial charts.
#[derive(Debug, Parser)]
#[command(name = "strata", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario's checks and write its JSON report.
    Run(RunArgs),
    /// Evaluate the transferred operations on a compact basis and write
    /// the structure-constant table.
    EmitTable(EmitArgs),
    /// Run the built-in verification suite on the bundled charts.
    Selfcheck(SelfcheckArgs),
    /// List the checks a scenario may request.
    ListChecks,
}

/// Size overrides applied on top of the scenario file.
#[derive(Debug, Args)]
struct CapOverrides {
    /// Override the scenario's highest transferred arity.
    #[arg(long, value_name = "N")]
    max_arity: Option<usize>,
    /// Override the scenario's operator-order cap for probe bases.
    #[arg(long, value_name = "N")]
    max_order: Option<usize>,
    /// Override the scenario's polynomial-degree cap for probe bases.
    #[arg(long, value_name = "N")]
    max_degree: Option<u32>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file to run.
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Write the JSON report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    caps: CapOverrides,
    /// Override the scenario's sampling seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads used to dispatch independent checks.
    #[arg(long, value_name = "N", default_value_t = 1)]
    jobs: usize,
    /// Record per-check wall times in the report.
    #[arg(long)]
    timings: bool,
    /// Arm one deliberate sign fault for the whole run.
    #[arg(long, value_name = "NAME")]
    inject_fault: Option<String>,
}

#[derive(Debug, Args)]
struct EmitArgs {
    /// Scenario file describing the chart and caps.
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Highest arity tabulated; must not exceed the scenario's cap.
    #[arg(long, value_name = "K")]
    arity: usize,
    /// Write the JSON table here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    caps: CapOverrides,
}

#[derive(Debug, Args)]
struct SelfcheckArgs {
    /// Comma-separated part names to run; an empty value runs nothing.
    #[arg(long, value_name = "LIST")]
    only: Option<String>,
    /// Arm one deliberate sign fault for the whole run.
    #[arg(long, value_name = "NAME")]
    inject_fault: Option<String>,
    /// Print per-part wall times.
    #[arg(long)]
    timings: bool,
}

// ---- entry point and exit discipline ----

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("strata: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::EmitTable(args) => cmd_emit_table(args),
        Command::Selfcheck(args) => cmd_selfcheck(args),
        Command::ListChecks => cmd_list_checks(),
    }
}

fn parse_fault(name: &str) -> Result<Fault> {
    match Fault::from_name(name) {
        Some(fault) => Ok(fault),
        None => {
            let known: Vec<&str> = Fault::ALL.iter().map(|f| f.name()).collect();
            bail!("unknown fault {name:?}; available: {}", known.join(", "))
        }
    }
}

fn arm_fault(request: Option<&str>) -> Result<Option<FaultGuard>> {
    Ok(request.map(parse_fault).transpose()?.map(inject))
}

// ---- run ----

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let mut scenario = load_scenario(&args.scenario)?;
    apply_overrides(&mut scenario, &args.caps, args.seed);
    let faulted = args.inject_fault.is_some();
    let jobs = if faulted && args.jobs > 1 {
        // The fault switch is thread-local, so worker threads would run clean.
        eprintln!("strata: fault injection forces --jobs 1");
        1
    } else {
        args.jobs.max(1)
    };
    let _guard = arm_fault(args.inject_fault.as_deref())?;
    let report = run_report(&scenario, jobs, args.timings)?;
    write_json(&report, args.out.as_deref())?;
    for record in &report.records {
        let verdict = match record.status {
            CheckStatus::Pass => "pass".to_string(),
            CheckStatus::Fail => format!(
                "FAIL ({})",
                record.counterexample.as_deref().unwrap_or("no witness")
            ),
        };
        eprintln!("  {}: {}", record.name, verdict);
    }
    eprintln!(
        "{}: {} passed, {} failed",
        report.scenario, report.passed, report.failed
    );
    Ok(exit_for_failures(report.failed))
}

fn exit_for_failures(failed: usize) -> ExitCode {
    if failed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing scenario {}", path.display()))
}

fn apply_overrides(scenario: &mut Scenario, caps: &CapOverrides, seed: Option<u64>) {
    if let Some(v) = caps.max_arity {
        scenario.caps.max_arity = v;
    }
    if let Some(v) = caps.max_order {
        scenario.caps.max_order = v;
    }
    if let Some(v) = caps.max_degree {
        scenario.caps.max_degree = v;
    }
    if let Some(v) = seed {
        scenario.seed = v;
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing output")?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Runs a scenario, dispatching checks over `jobs` worker threads; the
/// merged report is byte-identical to the sequential one because every
/// check samples from its own salted generator.
fn run_report(scenario: &Scenario, jobs: usize, timings: bool) -> Result<Report, FoliationError> {
    let catalogue = available_checks();
    for name in &scenario.checks {
        if !catalogue.iter().any(|(n, _)| n == name) {
            return Err(FoliationError::UnknownCheck(name.clone()));
        }
    }
    let selected: Vec<&'static str> = catalogue
        .iter()
        .map(|(name, _)| *name)
        .filter(|name| scenario.checks.is_empty() || scenario.checks.iter().any(|c| c == name))
        .collect();
    if jobs <= 1 || selected.len() <= 1 {
        return run_scenario(scenario, timings);
    }

    let slots: Vec<Mutex<Option<Result<Report, FoliationError>>>> =
        selected.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    thread::scope(|scope| {
        for _ in 0..jobs.min(selected.len()) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= selected.len() {
                    break;
                }
                let mut single = scenario.clone();
                single.checks = vec![selected[index].to_string()];
                let outcome = run_scenario(&single, timings);
                *slots[index].lock().expect("result slot") = Some(outcome);
            });
        }
    });

    let mut records = Vec::with_capacity(selected.len());
    let (mut passed, mut failed) = (0usize, 0usize);
    for slot in slots {
        let outcome = slot
            .into_inner()
            .expect("result slot")
            .expect("worker filled every slot");
        let mut single = outcome?;
        let record = single.records.pop().expect("single-check report");
        match record.status {
            CheckStatus::Pass => passed += 1,
            CheckStatus::Fail => failed += 1,
        }
        records.push(record);
    }
    Ok(Report {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        caps: scenario.caps,
        records,
        passed,
        failed,
    })
}

// ---- emit-table ----

fn cmd_emit_table(args: EmitArgs) -> Result<ExitCode> {
    let mut scenario = load_scenario(&args.scenario)?;
    apply_overrides(&mut scenario, &args.caps, None);
    let built = table::build_table(&scenario, args.arity)?;
    write_json(&built, args.out.as_deref())?;
    eprintln!(
        "{}: {} entries up to arity {}",
        scenario.name,
        built.entries.len(),
        args.arity
    );
    Ok(ExitCode::SUCCESS)
}

// ---- selfcheck ----

fn cmd_selfcheck(args: SelfcheckArgs) -> Result<ExitCode> {
    let only: Option<Vec<String>> = args.only.map(|list| {
        list.split(',')
            .map(str::trim)
            .filter(|part| !part.is_empty())
            .map(str::to_string)
            .collect()
    });
    let fault = args.inject_fault.as_deref().map(parse_fault).transpose()?;
    let failed = selfcheck::run(only.as_deref(), fault, args.timings)?;
    Ok(exit_for_failures(failed))
}

// ---- list-checks ----

fn cmd_list_checks() -> Result<ExitCode> {
    for (name, property) in available_checks() {
        println!("{name}: {property}");
    }
    Ok(ExitCode::SUCCESS)
}
