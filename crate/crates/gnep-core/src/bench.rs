//! Benchmark harness: a damped-Newton baseline on the Fischer–Burmeister
//! reformulation of the KKT system, a suite runner that times both solvers
//! over a problem/start grid, CSV persistence for run records, and
//! performance profiles (fraction of instances solved within a factor τ of
//! the per-instance best).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::kkt::{kkt_residual_from_values, MeritValue};
use crate::lcp::fb_component;
use crate::model::{EvalError, GnepProblem, JointPoint, KktData};
use crate::problems::{resolve_problem, ProblemError};
use crate::slcp::{slcp_solve, SlcpOptions, SolveResult, SolveStatus};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Sequential linearization with the complementarity subproblem.
    Slcp,
    /// Semismooth Newton on the Fischer–Burmeister system (baseline).
    Smm,
}

impl FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slcp" => Ok(SolverKind::Slcp),
            "smm" => Ok(SolverKind::Smm),
            other => Err(format!("unknown solver '{other}' (expected slcp or smm)")),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Slcp => "slcp",
            SolverKind::Smm => "smm",
        })
    }
}

/// Merit convention of the baseline: total = ½‖Ψ‖² split into the smooth
/// stationarity part ½‖F‖² and the Fischer–Burmeister part ½‖φ‖².
fn smm_merit(f: &DVector<f64>, g: &DVector<f64>, lambda: &DVector<f64>) -> MeritValue {
    let stationarity_part = 0.5 * f.norm_squared();
    let mut complementarity_part = 0.0;
    for i in 0..g.len() {
        complementarity_part += 0.5 * fb_component(lambda[i], -g[i]).powi(2);
    }
    MeritValue {
        total: stationarity_part + complementarity_part,
        complementarity_part,
        stationarity_part,
        infeasibility_part: 0.0,
    }
}

/// Stack Ψ = [F; φ(λ_i, −g_i)] and one element of its B-subdifferential. At
/// ties (λ_i, g_i) ≈ 0 the diagonal element 1/√2 − 1 is used for both
/// partials.
fn smm_system(data: &KktData, lambda: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = data.f.len();
    let m = data.g.len();
    let mut psi = DVector::zeros(n + m);
    let mut h = DMatrix::zeros(n + m, n + m);
    for r in 0..n {
        psi[r] = data.f[r];
        for c in 0..n {
            h[(r, c)] = data.jxf[(r, c)];
        }
        for c in 0..m {
            h[(r, n + c)] = data.e[(r, c)];
        }
    }
    for i in 0..m {
        let a = lambda[i];
        let b = -data.g[i];
        psi[n + i] = fb_component(a, b);
        let r = a.hypot(b);
        let (da, db) = if r <= 1e-14 {
            let c = std::f64::consts::FRAC_1_SQRT_2 - 1.0;
            (c, c)
        } else {
            (a / r - 1.0, b / r - 1.0)
        };
        for c in 0..n {
            h[(n + i, c)] = -db * data.jxg[(i, c)];
        }
        h[(n + i, n + i)] = da;
    }
    (psi, h)
}

/// Newton direction on Ψ with two fallbacks: exact LU solve, then a
/// Tikhonov-regularized normal system, then plain steepest descent on
/// ½‖Ψ‖².
fn smm_direction(h: &DMatrix<f64>, psi: &DVector<f64>) -> DVector<f64> {
    let scale = psi.amax().max(1.0);
    if let Some(d) = h.clone().lu().solve(&(-psi)) {
        if d.iter().all(|v| v.is_finite()) && (h * &d + psi).amax() <= 1e-8 * scale {
            return d;
        }
    }
    let k = h.ncols();
    let hth = h.transpose() * h + DMatrix::identity(k, k) * 1e-8;
    let rhs = -(h.transpose() * psi);
    if let Some(chol) = hth.cholesky() {
        return chol.solve(&rhs);
    }
    rhs
}

/// Damped Newton method on the Fischer–Burmeister reformulation
/// Ψ(x, λ) = 0 with an Armijo search on ½‖Ψ‖². Serves as the comparison
/// baseline: same stopping test, counters, and trace layout as the
/// linearization solver (`rho_final` is reported as 0 — no penalty is
/// involved). Only `tol`, `max_outer_iters`, and `max_halvings` of the
/// options are used.
pub fn solve_smm_baseline(
    problem: &GnepProblem,
    start: &JointPoint,
    opts: &SlcpOptions,
) -> Result<SolveResult, EvalError> {
    assert!(opts.tol > 0.0, "tol must be positive");
    problem.check_point(start)?;
    problem.reset_counters();
    let n = problem.n();
    let m = problem.m();
    let mut z = start.clone();
    let mut trace = Vec::new();
    let mut accepted = 0usize;

    for _ in 0..opts.max_outer_iters {
        let data = problem.eval_kkt_data(&z)?;
        let counters = problem.counters();
        let res = kkt_residual_from_values(&data.f, &data.g, &z.lambda);
        let merit = smm_merit(&data.f, &data.g, &z.lambda);
        let mut record = crate::slcp::IterationRecord {
            merit,
            kkt_residual: res,
            step: None,
            subproblem: None,
            counters,
        };
        if res <= opts.tol {
            trace.push(record);
            return Ok(SolveResult {
                point: z,
                status: SolveStatus::Converged,
                kkt_residual: res,
                iterations: accepted,
                rho_final: 0.0,
                trace,
            });
        }
        let (psi, h) = smm_system(&data, &z.lambda);
        let mut d = smm_direction(&h, &psi);
        let grad = h.transpose() * &psi;
        let mut dirder = grad.dot(&d);
        if dirder >= 0.0 {
            d = -&grad;
            dirder = -grad.norm_squared();
        }
        let theta0 = 0.5 * psi.norm_squared();
        let mut found: Option<(f64, JointPoint)> = None;
        if dirder < 0.0 {
            let mut tau = 1.0;
            for _ in 0..=opts.max_halvings {
                let trial = JointPoint {
                    x: &z.x + tau * d.rows(0, n),
                    lambda: &z.lambda + tau * d.rows(n, m),
                };
                match problem.eval_values(&trial) {
                    Ok((f, g)) => {
                        let theta = smm_merit(&f, &g, &trial.lambda).total;
                        if theta.is_finite() && theta <= theta0 + 1e-4 * tau * dirder {
                            found = Some((tau, trial));
                            break;
                        }
                    }
                    Err(EvalError::NonFinite { .. }) => {}
                    Err(e) => return Err(e),
                }
                tau *= 0.5;
            }
        }
        match found {
            Some((tau, trial)) => {
                record.step = Some(tau);
                trace.push(record);
                z = trial;
                accepted += 1;
            }
            None => {
                trace.push(record);
                return Ok(SolveResult {
                    point: z,
                    status: SolveStatus::LineSearchFailed,
                    kkt_residual: res,
                    iterations: accepted,
                    rho_final: 0.0,
                    trace,
                });
            }
        }
    }
    let (f, g) = problem.eval_values(&z)?;
    let res = kkt_residual_from_values(&f, &g, &z.lambda);
    trace.push(crate::slcp::IterationRecord {
        merit: smm_merit(&f, &g, &z.lambda),
        kkt_residual: res,
        step: None,
        subproblem: None,
        counters: problem.counters(),
    });
    let status = if res <= opts.tol { SolveStatus::Converged } else { SolveStatus::MaxIters };
    Ok(SolveResult {
        point: z,
        status,
        kkt_residual: res,
        iterations: accepted,
        rho_final: 0.0,
        trace,
    })
}

/// Outcome of one benchmark run. Extends the solver statuses with a
/// post-hoc wall-clock limit: the run completes either way, and is marked
/// `TimeLimit` (counting as a failure for profiles) when it took too long.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIters,
    LineSearchFailed,
    SubproblemFailed,
    TimeLimit,
}

impl From<SolveStatus> for RunStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Converged => RunStatus::Converged,
            SolveStatus::MaxIters => RunStatus::MaxIters,
            SolveStatus::LineSearchFailed => RunStatus::LineSearchFailed,
            SolveStatus::SubproblemFailed => RunStatus::SubproblemFailed,
        }
    }
}

/// One (problem, start, solver) run. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub start: String,
    pub solver: SolverKind,
    pub status: RunStatus,
    pub time_ms: f64,
    pub iters: u64,
    pub grad_evals: u64,
    pub hess_evals: u64,
    pub kkt_residual: f64,
}

/// Starting point spec: a scalar s (meaning x = s·𝟙, λ = 0) or the full x
/// vector (λ = 0 either way).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl StartSpec {
    pub fn label(&self) -> String {
        match self {
            StartSpec::Scalar(s) => format!("{s}"),
            StartSpec::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
                format!("[{}]", parts.join(","))
            }
        }
    }

    pub fn to_point(&self, problem: &GnepProblem) -> Result<JointPoint, ProblemError> {
        let n = problem.n();
        let x = match self {
            StartSpec::Scalar(s) => DVector::from_element(n, *s),
            StartSpec::Vector(v) => {
                if v.len() != n {
                    return Err(ProblemError::InvalidParams(format!(
                        "start vector has {} entries, problem '{}' has n = {n}",
                        v.len(),
                        problem.name
                    )));
                }
                DVector::from_row_slice(v)
            }
        };
        Ok(JointPoint::new(x, DVector::zeros(problem.m())))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemEntry {
    pub problem: String,
    pub starts: Vec<StartSpec>,
}

fn default_solvers() -> Vec<SolverKind> {
    vec![SolverKind::Slcp, SolverKind::Smm]
}

fn default_time_limit() -> u64 {
    60_000
}

fn default_tol() -> f64 {
    1e-7
}

fn default_max_outer() -> usize {
    200
}

/// Declarative benchmark suite, loaded from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub problems: Vec<ProblemEntry>,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverKind>,
    #[serde(default = "default_time_limit")]
    pub time_limit_ms: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer_iters: usize,
}

pub fn load_suite_config<P: AsRef<Path>>(path: P) -> Result<SuiteConfig, ProblemError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| ProblemError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Run every (problem, start, solver) combination and collect records,
/// sorted by (problem, start, solver) for reproducible output.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<RunRecord>, ProblemError> {
    let solvers =
        if config.solvers.is_empty() { default_solvers() } else { config.solvers.clone() };
    let mut opts = SlcpOptions::default();
    opts.tol = config.tol;
    opts.max_outer_iters = config.max_outer_iters;
    let mut records = Vec::new();
    for entry in &config.problems {
        let problem = resolve_problem(&entry.problem)?;
        for spec in &entry.starts {
            let start = spec.to_point(&problem)?;
            for &solver in &solvers {
                let t0 = Instant::now();
                let result = match solver {
                    SolverKind::Slcp => slcp_solve(&problem, &start, &opts),
                    SolverKind::Smm => solve_smm_baseline(&problem, &start, &opts),
                };
                let time_ms = t0.elapsed().as_secs_f64() * 1e3;
                let result = result.map_err(|e| {
                    ProblemError::InvalidParams(format!(
                        "{} at start {}: {e}",
                        entry.problem,
                        spec.label()
                    ))
                })?;
                let counters = problem.counters();
                let status = if time_ms > config.time_limit_ms as f64 {
                    RunStatus::TimeLimit
                } else {
                    result.status.into()
                };
                records.push(RunRecord {
                    problem: problem.name.clone(),
                    start: spec.label(),
                    solver,
                    status,
                    time_ms,
                    iters: result.iterations as u64,
                    grad_evals: counters.grad_evals,
                    hess_evals: counters.hess_evals,
                    kkt_residual: result.kkt_residual,
                });
            }
        }
    }
    records.sort_by(|a, b| {
        (&a.problem, &a.start, a.solver).cmp(&(&b.problem, &b.start, b.solver))
    });
    Ok(records)
}

fn csv_error(path: &Path, e: csv::Error) -> ProblemError {
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(source) => {
            ProblemError::Io { path: path.display().to_string(), source }
        }
        _ => ProblemError::Parse { path: path.display().to_string(), message },
    }
}

pub fn write_records_csv<P: AsRef<Path>>(
    path: P,
    records: &[RunRecord],
) -> Result<(), ProblemError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_records_csv<P: AsRef<Path>>(path: P) -> Result<Vec<RunRecord>, ProblemError> {
    let path = path.as_ref();
    let mut rd = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut out = Vec::new();
    for row in rd.deserialize() {
        out.push(row.map_err(|e| csv_error(path, e))?);
    }
    Ok(out)
}

/// Cost measure a profile ranks solvers by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Time,
    Grad,
    Hess,
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "time" => Ok(Metric::Time),
            "grad" => Ok(Metric::Grad),
            "hess" => Ok(Metric::Hess),
            other => Err(format!("unknown metric '{other}' (expected time, grad, or hess)")),
        }
    }
}

impl Metric {
    /// Cost of a run under this metric; failures cost ∞ and values are
    /// floored away from zero so best-cost ratios stay well defined.
    fn value(&self, r: &RunRecord) -> f64 {
        if r.status != RunStatus::Converged {
            return f64::INFINITY;
        }
        let v = match self {
            Metric::Time => r.time_ms,
            Metric::Grad => r.grad_evals as f64,
            Metric::Hess => r.hess_evals as f64,
        };
        v.max(1e-9)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileCurve {
    pub solver: SolverKind,
    /// fraction[i] = share of instances this solver finished within a
    /// factor taus[i] of the best solver on that instance.
    pub fraction: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileResult {
    pub taus: Vec<f64>,
    pub curves: Vec<ProfileCurve>,
    /// Instances (problem@start) no solver finished; they are dropped from
    /// the denominator.
    pub excluded: Vec<String>,
    /// Number of instances the fractions are computed over.
    pub instances: usize,
}

/// Standard performance profile over the records: one instance per
/// (problem, start) pair, cost ratios relative to the per-instance best,
/// evaluated on a grid of factors τ that always contains every exact
/// breakpoint (so anchor values are hit exactly).
pub fn performance_profile(records: &[RunRecord], metric: Metric) -> ProfileResult {
    let solvers: BTreeSet<SolverKind> = records.iter().map(|r| r.solver).collect();
    let mut by_instance: BTreeMap<(String, String), BTreeMap<SolverKind, f64>> = BTreeMap::new();
    for r in records {
        by_instance
            .entry((r.problem.clone(), r.start.clone()))
            .or_default()
            .insert(r.solver, metric.value(r));
    }
    let mut ratios: BTreeMap<SolverKind, Vec<f64>> =
        solvers.iter().map(|&s| (s, Vec::new())).collect();
    let mut excluded = Vec::new();
    let mut instances = 0usize;
    for ((prob, start), vals) in &by_instance {
        let best = vals.values().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            excluded.push(format!("{prob}@{start}"));
            continue;
        }
        instances += 1;
        for &s in &solvers {
            let v = vals.get(&s).copied().unwrap_or(f64::INFINITY);
            ratios.get_mut(&s).unwrap().push(if v.is_finite() { v / best } else { f64::INFINITY });
        }
    }
    let mut taus: Vec<f64> = (0..=180).map(|i| 1.0 + 0.05 * i as f64).collect();
    for rs in ratios.values() {
        taus.extend(rs.iter().copied().filter(|v| v.is_finite()));
    }
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    let curves = solvers
        .iter()
        .map(|&s| {
            let rs = &ratios[&s];
            let fraction = taus
                .iter()
                .map(|&tau| {
                    if instances == 0 {
                        return 0.0;
                    }
                    let hit = rs.iter().filter(|&&r| r <= tau * (1.0 + 1e-12)).count();
                    hit as f64 / instances as f64
                })
                .collect();
            ProfileCurve { solver: s, fraction }
        })
        .collect();
    ProfileResult { taus, curves, excluded, instances }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Convexity;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn point(x: &[f64], l: &[f64]) -> JointPoint {
        JointPoint { x: DVector::from_row_slice(x), lambda: DVector::from_row_slice(l) }
    }

    #[test]
    fn smm_solves_affine_problem_in_one_newton_step() {
        let problem = crate::problems::make_two_player_quadratic();
        let opts = SlcpOptions::default();
        let result = solve_smm_baseline(&problem, &point(&[1.0, -1.5], &[]), &opts).unwrap();
        assert_eq!(result.status, SolveStatus::Converged);
        assert_eq!(result.iterations, 1);
        assert_eq!(result.trace.len(), 2);
        assert_eq!(result.trace[0].step, Some(1.0));
        assert_abs_diff_eq!(result.point.x.amax(), 0.0, epsilon = 1e-12);
        assert_eq!(result.rho_final, 0.0);
    }

    /// min ½x² s.t. 1 − x ≤ 0: solution x = 1, λ = 1.
    fn lower_bounded_single() -> GnepProblem {
        GnepProblem::new(
            "single-lb",
            vec![1],
            vec![1],
            Arc::new(|_, x: &DVector<f64>| DVector::from_element(1, x[0])),
            Arc::new(|_, x: &DVector<f64>| DVector::from_element(1, 1.0 - x[0])),
            Arc::new(|_, _x: &DVector<f64>| DMatrix::from_element(1, 1, -1.0)),
            Arc::new(|_, _l: &DVector<f64>, _x: &DVector<f64>| DMatrix::from_element(1, 1, 1.0)),
            vec![],
            Convexity::PlayerConvex,
        )
    }

    #[test]
    fn smm_solves_constrained_problem() {
        let problem = lower_bounded_single();
        let opts = SlcpOptions::default();
        let result = solve_smm_baseline(&problem, &point(&[0.0], &[0.0]), &opts).unwrap();
        assert_eq!(result.status, SolveStatus::Converged);
        assert_abs_diff_eq!(result.point.x[0], 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(result.point.lambda[0], 1.0, epsilon = 1e-5);
        // one linearization pass per visited iterate
        let visited = result.iterations + 1;
        assert_eq!(result.trace.last().unwrap().counters.hess_evals, visited as u64);
    }

    #[test]
    fn smm_merit_convention() {
        let f = DVector::from_vec(vec![3.0, 4.0]);
        let g = DVector::from_vec(vec![-1.0]);
        let lambda = DVector::from_vec(vec![0.0]);
        let m = smm_merit(&f, &g, &lambda);
        assert_abs_diff_eq!(m.stationarity_part, 12.5, epsilon = 1e-14);
        // φ(0, 1) = 1 − 1 = 0
        assert_abs_diff_eq!(m.complementarity_part, 0.0, epsilon = 1e-14);
        assert_eq!(m.infeasibility_part, 0.0);
        assert_abs_diff_eq!(m.total, 12.5, epsilon = 1e-14);
    }

    fn rec(problem: &str, start: &str, solver: SolverKind, time_ms: f64) -> RunRecord {
        RunRecord {
            problem: problem.into(),
            start: start.into(),
            solver,
            status: RunStatus::Converged,
            time_ms,
            iters: 3,
            grad_evals: 10,
            hess_evals: 4,
            kkt_residual: 1e-9,
        }
    }

    #[test]
    fn profile_two_by_two_anchor() {
        let records = vec![
            rec("p1", "0", SolverKind::Slcp, 1.0),
            rec("p1", "0", SolverKind::Smm, 2.0),
            rec("p2", "0", SolverKind::Slcp, 4.0),
            rec("p2", "0", SolverKind::Smm, 2.0),
        ];
        let profile = performance_profile(&records, Metric::Time);
        assert_eq!(profile.instances, 2);
        assert!(profile.excluded.is_empty());
        let at = |solver: SolverKind, tau: f64| -> f64 {
            let idx = profile.taus.iter().position(|&t| (t - tau).abs() < 1e-12).unwrap();
            profile.curves.iter().find(|c| c.solver == solver).unwrap().fraction[idx]
        };
        // slcp ratios {1, 2}; smm ratios {2, 1}
        assert_eq!(at(SolverKind::Slcp, 1.0), 0.5);
        assert_eq!(at(SolverKind::Smm, 1.0), 0.5);
        assert_eq!(at(SolverKind::Slcp, 2.0), 1.0);
        assert_eq!(at(SolverKind::Smm, 2.0), 1.0);
        assert_eq!(at(SolverKind::Slcp, 1.95), 0.5);
    }

    #[test]
    fn profile_excludes_universally_failed_instances() {
        let mut failed = rec("p1", "0", SolverKind::Slcp, 1.0);
        failed.status = RunStatus::MaxIters;
        let mut failed2 = rec("p1", "0", SolverKind::Smm, 1.0);
        failed2.status = RunStatus::TimeLimit;
        let records =
            vec![failed, failed2, rec("p2", "0", SolverKind::Slcp, 1.0), rec("p2", "0", SolverKind::Smm, 3.0)];
        let profile = performance_profile(&records, Metric::Time);
        assert_eq!(profile.instances, 1);
        assert_eq!(profile.excluded, vec!["p1@0".to_string()]);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn profile_curves_monotone_bounded_and_order_free(
                outcomes in proptest::collection::vec((0.001..1000.0f64, any::<bool>()), 12),
                rotate in 0usize..12,
            ) {
                let mut records = Vec::new();
                let mut it = outcomes.iter();
                for problem in ["p1", "p2", "p3"] {
                    for start in ["a", "b"] {
                        for solver in [SolverKind::Slcp, SolverKind::Smm] {
                            let &(time, ok) = it.next().unwrap();
                            let mut r = rec(problem, start, solver, time);
                            if !ok {
                                r.status = RunStatus::MaxIters;
                            }
                            records.push(r);
                        }
                    }
                }
                let profile = performance_profile(&records, Metric::Time);
                for curve in &profile.curves {
                    prop_assert_eq!(curve.fraction.len(), profile.taus.len());
                    let mut prev = 0.0;
                    for &fr in &curve.fraction {
                        prop_assert!((0.0..=1.0).contains(&fr), "fraction {} out of range", fr);
                        prop_assert!(fr >= prev, "fraction dropped from {} to {}", prev, fr);
                        prev = fr;
                    }
                }
                // record order must not matter
                records.rotate_left(rotate);
                let rotated = performance_profile(&records, Metric::Time);
                prop_assert_eq!(&profile.taus, &rotated.taus);
                for curve in &profile.curves {
                    let twin = rotated
                        .curves
                        .iter()
                        .find(|c| c.solver == curve.solver)
                        .expect("same solvers on both runs");
                    prop_assert_eq!(&curve.fraction, &twin.fraction);
                }
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        let mut records = vec![
            rec("p1", "0.1", SolverKind::Slcp, 1.5),
            rec("p1", "[1,2]", SolverKind::Smm, 0.25),
        ];
        records[1].status = RunStatus::TimeLimit;
        write_records_csv(&path, &records).unwrap();
        let back = read_records_csv(&path).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn suite_config_defaults_and_rejections() {
        let cfg: SuiteConfig = serde_json::from_str(
            r#"{"problems": [{"problem": "two-player-quadratic", "starts": [1.0, [0.5, -0.5]]}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.solvers, vec![SolverKind::Slcp, SolverKind::Smm]);
        assert_eq!(cfg.time_limit_ms, 60_000);
        assert_eq!(cfg.tol, 1e-7);
        assert_eq!(cfg.max_outer_iters, 200);
        assert_eq!(cfg.problems[0].starts[0], StartSpec::Scalar(1.0));
        assert_eq!(cfg.problems[0].starts[1], StartSpec::Vector(vec![0.5, -0.5]));
        let bad: Result<SuiteConfig, _> =
            serde_json::from_str(r#"{"problems": [], "tolerance": 0.1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn run_suite_produces_sorted_converged_records() {
        let cfg: SuiteConfig = serde_json::from_str(
            r#"{"problems": [{"problem": "two-player-quadratic", "starts": [1.0, 2.0]}]}"#,
        )
        .unwrap();
        let records = run_suite(&cfg).unwrap();
        assert_eq!(records.len(), 4);
        for r in &records {
            assert_eq!(r.status, RunStatus::Converged);
            assert!(r.time_ms > 0.0);
            assert!(r.kkt_residual <= 1e-7);
        }
        let keys: Vec<_> =
            records.iter().map(|r| (r.problem.clone(), r.start.clone(), r.solver)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        // post-hoc time limit flags every run
        let mut strict = cfg.clone();
        strict.time_limit_ms = 0;
        let records = run_suite(&strict).unwrap();
        assert!(records.iter().all(|r| r.status == RunStatus::TimeLimit));
    }

    #[test]
    fn start_spec_validation() {
        let problem = crate::problems::make_two_player_quadratic();
        let p = StartSpec::Scalar(0.5).to_point(&problem).unwrap();
        assert_eq!(p.x, DVector::from_element(2, 0.5));
        assert!(StartSpec::Vector(vec![1.0]).to_point(&problem).is_err());
        assert_eq!(StartSpec::Vector(vec![1.0, 2.5]).label(), "[1,2.5]");
    }

    #[test]
    fn parse_helpers() {
        assert_eq!("slcp".parse::<SolverKind>().unwrap(), SolverKind::Slcp);
        assert_eq!("smm".parse::<SolverKind>().unwrap(), SolverKind::Smm);
        assert!("newton".parse::<SolverKind>().is_err());
        assert_eq!("time".parse::<Metric>().unwrap(), Metric::Time);
        assert_eq!("grad".parse::<Metric>().unwrap(), Metric::Grad);
        assert_eq!("hess".parse::<Metric>().unwrap(), Metric::Hess);
        assert!("flops".parse::<Metric>().is_err());
        assert_eq!(SolverKind::Slcp.to_string(), "slcp");
    }
}
