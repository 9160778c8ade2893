//! Command-line front end: solve a problem from a starting point, run a
//! benchmark suite, turn run records into performance profiles, and produce
//! diagnostic reports at a point.
//!
//! Exit codes: 0 on success (solve converged / command completed), 2 when a
//! solve finished without reaching the tolerance, 3 on usage or data errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

use gnep_core::bench::{
    load_suite_config, performance_profile, read_records_csv, run_suite, solve_smm_baseline,
    write_records_csv, Metric, SolverKind,
};
use gnep_core::diagnostics::{
    diagnose, DiagnoseOptions, HemistabilityOptions, ProbeOptions, ACT_TOL_CLOSED_FORM,
    ACT_TOL_COMPUTED,
};
use gnep_core::model::{GnepProblem, JointPoint};
use gnep_core::problems::{builtin_solution, resolve_problem};
use gnep_core::slcp::{slcp_solve, SlcpOptions, SolveResult, SolveStatus};

#[derive(Parser)]
#[command(
    name = "gnep",
    version,
    about = "Generalized Nash equilibrium solver (sequential linearization method)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem from a starting point.
    Solve(SolveArgs),
    /// Run a benchmark suite described by a JSON config and write a CSV of
    /// run records.
    Bench(BenchArgs),
    /// Compute performance profiles from a CSV of run records.
    Profile(ProfileArgs),
    /// Report regularity diagnostics at a point.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Built-in problem name or path to a problem JSON file.
    problem: String,
    /// Starting x: a scalar s (meaning s·𝟙) or comma-separated entries.
    #[arg(long)]
    x0: String,
    /// Starting multipliers, same format; must be nonnegative. Default 0.
    #[arg(long)]
    lambda0: Option<String>,
    /// Solver: slcp (default) or smm (semismooth-Newton baseline).
    #[arg(long, default_value = "slcp")]
    solver: String,
    /// Initial merit penalty weight.
    #[arg(long)]
    rho: Option<f64>,
    /// Sufficient-decrease coefficient in (0,1).
    #[arg(long)]
    eta: Option<f64>,
    /// KKT residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Outer iteration budget.
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Keep the penalty weight fixed instead of escalating on rejection.
    #[arg(long)]
    no_rho_adapt: bool,
    /// Write the full iteration trace as JSON to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV of run records.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    /// CSV of run records produced by `gnep bench`.
    records: PathBuf,
    /// Cost measure: time, grad, or hess.
    #[arg(long, default_value = "time")]
    metric: String,
    /// Output CSV: tau column plus one fraction column per solver.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Built-in problem name or path to a problem JSON file.
    problem: String,
    /// Point to diagnose: path to a JSON file {"x": [...], "lambda": [...]}
    /// or the literal `solution` for the built-in reference solution.
    #[arg(long)]
    at: String,
    /// Activity tolerance separating active from inactive constraints.
    #[arg(long)]
    act_tol: Option<f64>,
    /// Write the JSON report here (it is always printed to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_entries(s: &str, len: usize, what: &str) -> Result<DVector<f64>> {
    if s.contains(',') {
        let vals: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad {what} entry '{t}'")))
            .collect::<Result<_>>()?;
        if vals.len() != len {
            bail!("{what} has {} entries, expected {len}", vals.len());
        }
        Ok(DVector::from_vec(vals))
    } else {
        let v: f64 =
            s.trim().parse().with_context(|| format!("{what} must be a number, got '{s}'"))?;
        Ok(DVector::from_element(len, v))
    }
}

fn write_json(path: &Path, value: &SolveResult) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn print_summary(problem: &GnepProblem, solver: SolverKind, result: &SolveResult) {
    let counters = problem.counters();
    println!("problem: {} (n = {}, m = {})", problem.name, problem.n(), problem.m());
    println!("solver: {solver}");
    println!("status: {:?}", result.status);
    println!("iterations: {}", result.iterations);
    println!("kkt residual: {:e}", result.kkt_residual);
    println!("grad evals: {}", counters.grad_evals);
    println!("hess evals: {}", counters.hess_evals);
    let x: Vec<f64> = result.point.x.iter().copied().collect();
    let l: Vec<f64> = result.point.lambda.iter().copied().collect();
    println!("x: {}", serde_json::to_string(&x).unwrap());
    println!("lambda: {}", serde_json::to_string(&l).unwrap());
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let problem = resolve_problem(&args.problem)?;
    let solver: SolverKind = args.solver.parse().map_err(anyhow::Error::msg)?;
    let x0 = parse_entries(&args.x0, problem.n(), "--x0")?;
    let lambda0 = match &args.lambda0 {
        Some(s) => parse_entries(s, problem.m(), "--lambda0")?,
        None => DVector::zeros(problem.m()),
    };
    if lambda0.iter().any(|&l| l < 0.0) {
        bail!("--lambda0 entries must be nonnegative");
    }
    let mut opts = SlcpOptions::default();
    if let Some(rho) = args.rho {
        if rho <= 0.0 {
            bail!("--rho must be positive");
        }
        opts.rho = rho;
    }
    if let Some(eta) = args.eta {
        if !(eta > 0.0 && eta < 1.0) {
            bail!("--eta must lie in (0,1)");
        }
        opts.eta = eta;
    }
    if let Some(tol) = args.tol {
        if tol <= 0.0 {
            bail!("--tol must be positive");
        }
        opts.tol = tol;
    }
    if let Some(mi) = args.max_iter {
        opts.max_outer_iters = mi;
    }
    if args.no_rho_adapt {
        opts.rho_adapt = false;
    }
    let start = JointPoint::new(x0, lambda0);
    let result = match solver {
        SolverKind::Slcp => slcp_solve(&problem, &start, &opts)?,
        SolverKind::Smm => solve_smm_baseline(&problem, &start, &opts)?,
    };
    print_summary(&problem, solver, &result);
    if let Some(path) = &args.trace {
        write_json(path, &result)?;
        println!("trace written to {}", path.display());
    }
    Ok(if result.status == SolveStatus::Converged { 0 } else { 2 })
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    let config = load_suite_config(&args.config)?;
    let records = run_suite(&config)?;
    write_records_csv(&args.out, &records)?;
    let converged = records.iter().filter(|r| r.status == gnep_core::bench::RunStatus::Converged).count();
    println!(
        "{} runs ({} converged) written to {}",
        records.len(),
        converged,
        args.out.display()
    );
    Ok(0)
}

fn cmd_profile(args: ProfileArgs) -> Result<u8> {
    let records = read_records_csv(&args.records)?;
    if records.is_empty() {
        bail!("{} contains no run records", args.records.display());
    }
    let metric: Metric = args.metric.parse().map_err(anyhow::Error::msg)?;
    let profile = performance_profile(&records, metric);
    // plain numeric table: tau plus one fraction column per solver
    let mut text = String::from("tau");
    for curve in &profile.curves {
        text.push(',');
        text.push_str(&curve.solver.to_string());
    }
    text.push('\n');
    for (i, tau) in profile.taus.iter().enumerate() {
        text.push_str(&format!("{tau}"));
        for curve in &profile.curves {
            text.push_str(&format!(",{}", curve.fraction[i]));
        }
        text.push('\n');
    }
    std::fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "profile over {} instances ({} excluded) written to {}",
        profile.instances,
        profile.excluded.len(),
        args.out.display()
    );
    for inst in &profile.excluded {
        eprintln!("excluded (no solver finished): {inst}");
    }
    Ok(0)
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<u8> {
    let problem = resolve_problem(&args.problem)?;
    let (point, at_reference) = if args.at == "solution" {
        (builtin_solution(&args.problem)?, true)
    } else {
        let text = std::fs::read_to_string(&args.at)
            .with_context(|| format!("reading point file {}", args.at))?;
        let point: JointPoint = serde_json::from_str(&text)
            .with_context(|| format!("parsing point file {}", args.at))?;
        (point, false)
    };
    let act_tol = args
        .act_tol
        .unwrap_or(if at_reference { ACT_TOL_CLOSED_FORM } else { ACT_TOL_COMPUTED });
    if act_tol <= 0.0 {
        bail!("--act-tol must be positive");
    }
    let opts = DiagnoseOptions {
        act_tol,
        probe: Some(ProbeOptions::default()),
        hemistability: Some(HemistabilityOptions::default()),
    };
    let report = diagnose(&problem, &point, &opts)?;
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(path) = &args.out {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not errors
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Profile(a) => cmd_profile(a),
        Command::Diagnose(a) => cmd_diagnose(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
