use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use renyi_core::harness::{replay, run_check, CheckName, FailureRecord, Instance, PropertyReport, TrialPlan};
use renyi_core::AlphaOrder;
use serde::Serialize;

use crate::io::{emit, parse_list, pretty, read_json, CliError, CliResult};
use crate::{Format, Globals, OptimizerArgs};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Check name, or `all`.
    check: Option<String>,
    /// Trials per check, replacing the default count.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated dimensions.
    #[arg(long)]
    dims: Option<String>,
    /// Comma-separated orders (`inf` allowed).
    #[arg(long)]
    alphas: Option<String>,
    /// Failure threshold replacing each check's default.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Record wall-clock time in reports (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    /// Re-evaluate a stored failure instance instead of running a suite.
    #[arg(long, conflicts_with_all = ["check", "trials", "dims", "alphas"])]
    replay: Option<PathBuf>,
    #[command(flatten)]
    opt: OptimizerArgs,
}

#[derive(Serialize)]
struct Aggregate<'a> {
    seed: u64,
    total_trials: usize,
    total_failures: usize,
    total_inconclusive: usize,
    passed: bool,
    checks: &'a [PropertyReport],
}

fn plan_for(check: CheckName, args: &VerifyArgs, seed: u64) -> CliResult<TrialPlan> {
    let mut plan = TrialPlan::default_for(check, seed);
    if let Some(t) = args.trials {
        plan.trials = t;
    }
    if let Some(d) = &args.dims {
        plan.dims = parse_list(d, "dimension", |t| t.parse::<usize>().ok())?;
    }
    if let Some(a) = &args.alphas {
        plan.alphas = parse_list(a, "alpha", |t| t.parse::<AlphaOrder>().ok())?;
    }
    plan.tolerance = args.tolerance;
    plan.optimizer = args.opt.config(seed)?;
    plan.validate(check)?;
    Ok(plan)
}

/// `<dir>/<stem>.<check>.trial<i>.json` next to the report, or in the
/// working directory when there is no report file.
fn failure_path(out: Option<&Path>, check: CheckName, trial: usize) -> PathBuf {
    let (dir, stem) = match out {
        Some(p) => (
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
            p.file_stem().map_or("report".into(), |s| s.to_string_lossy().into_owned()),
        ),
        None => (PathBuf::new(), "verify".to_string()),
    };
    dir.join(format!("{stem}.{check}.trial{trial}.json"))
}

fn persist_failures(report: &mut PropertyReport, out: Option<&Path>) -> CliResult<()> {
    for rec in &report.failed {
        let path = failure_path(out, report.check, rec.trial);
        emit(&pretty(rec), Some(&path))?;
        report.failure_instances.push(path.to_string_lossy().into_owned());
    }
    Ok(())
}

fn run_replay(path: &Path, args: &VerifyArgs, g: &Globals) -> CliResult<ExitCode> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("cannot read {}: {e}", path.display())))?;
    let (instance, stored_tol) = match serde_json::from_str::<FailureRecord>(&text) {
        Ok(r) => (r.instance, Some(r.tolerance)),
        Err(_) => (read_json::<Instance>(path)?, None),
    };
    let outcome = replay(&instance, args.tolerance.or(stored_tol))?;
    emit(&pretty(&outcome), g.out.as_deref())?;
    Ok(if outcome.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn run(args: VerifyArgs, g: &Globals) -> CliResult<ExitCode> {
    if g.format == Some(Format::Csv) {
        return Err(CliError::usage("verify reports are JSON only"));
    }
    if let Some(path) = &args.replay {
        return run_replay(path, &args, g);
    }
    let name = args
        .check
        .as_deref()
        .ok_or_else(|| CliError::usage("verify needs a check name, `all`, or --replay FILE"))?;
    let checks: Vec<CheckName> = if name == "all" {
        CheckName::ALL.to_vec()
    } else {
        vec![name.parse::<CheckName>().map_err(|e| CliError::usage(e.to_string()))?]
    };
    // Every plan is validated before anything runs.
    let plans = checks
        .iter()
        .map(|&c| plan_for(c, &args, g.seed))
        .collect::<CliResult<Vec<_>>>()?;

    let mut reports = Vec::with_capacity(checks.len());
    for (&check, plan) in checks.iter().zip(&plans) {
        let mut report = run_check(check, plan)?;
        if !args.timing {
            report.elapsed_s = 0.0;
        }
        persist_failures(&mut report, g.out.as_deref())?;
        eprintln!(
            "{check}: {} trials, {} failures, {} inconclusive",
            report.trials, report.failures, report.inconclusive
        );
        reports.push(report);
    }
    let failures: usize = reports.iter().map(|r| r.failures).sum();
    let text = if name == "all" {
        pretty(&Aggregate {
            seed: g.seed,
            total_trials: reports.iter().map(|r| r.trials).sum(),
            total_failures: failures,
            total_inconclusive: reports.iter().map(|r| r.inconclusive).sum(),
            passed: failures == 0,
            checks: &reports,
        })
    } else {
        pretty(&reports[0])
    };
    emit(&text, g.out.as_deref())?;
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
