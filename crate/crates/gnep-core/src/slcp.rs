//! Outer driver: sequential linearization of the KKT complementarity system
//! with a nonsmooth-merit line search. Each iteration linearizes at the
//! current iterate, solves the mixed linear complementarity subproblem for a
//! step (p, q), and backtracks on the penalized merit function until
//! Φ_ρ(z + τd) ≤ (1 − ητ)·Φ_ρ(z). The penalty weight ρ can escalate when a
//! step is rejected at every trial length.

use nalgebra::DVector;
use serde::Serialize;

use crate::kkt::{kkt_residual_from_values, merit_from_values, MeritValue};
use crate::model::{EvalCounters, EvalError, GnepProblem, JointPoint};
use crate::subproblem::{solve_subproblem, SubproblemStats};

#[derive(Debug, Clone)]
pub struct SlcpOptions {
    /// Initial penalty weight on the stationarity part of the merit.
    pub rho: f64,
    /// Sufficient-decrease coefficient η ∈ (0, 1).
    pub eta: f64,
    /// First trial step length, in (0, 1]; keeping it ≤ 1 preserves λ ≥ 0.
    pub tau0: f64,
    /// Convergence threshold on the KKT residual.
    pub tol: f64,
    pub max_outer_iters: usize,
    /// Halvings per line search before the step counts as rejected.
    pub max_halvings: usize,
    /// Escalate ρ (up to 3 times per iteration) when the line search rejects
    /// the step at every trial length.
    pub rho_adapt: bool,
    pub rho_scale: f64,
}

impl Default for SlcpOptions {
    fn default() -> Self {
        Self {
            rho: 10.0,
            eta: 0.1,
            tau0: 1.0,
            tol: 1e-7,
            max_outer_iters: 200,
            max_halvings: 50,
            rho_adapt: true,
            rho_scale: 10.0,
        }
    }
}

/// Ceiling for penalty escalation.
pub const RHO_MAX: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    LineSearchFailed,
    SubproblemFailed,
}

/// One entry per visited iterate, including the final one.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    /// Merit at this iterate under the ρ in effect when it was reached.
    pub merit: MeritValue,
    pub kkt_residual: f64,
    /// Step length accepted from this iterate; `None` on the last record.
    pub step: Option<f64>,
    /// Stats of the subproblem solved at this iterate, when one was solved.
    pub subproblem: Option<SubproblemStats>,
    /// Cumulative oracle counters right after evaluating this iterate.
    pub counters: EvalCounters,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub point: JointPoint,
    pub status: SolveStatus,
    pub kkt_residual: f64,
    /// Number of accepted steps.
    pub iterations: usize,
    pub rho_final: f64,
    pub trace: Vec<IterationRecord>,
}

fn validate_options(opts: &SlcpOptions) {
    assert!(opts.rho > 0.0, "rho must be positive");
    assert!(opts.eta > 0.0 && opts.eta < 1.0, "eta must lie in (0,1)");
    assert!(opts.tau0 > 0.0 && opts.tau0 <= 1.0, "tau0 must lie in (0,1]");
    assert!(opts.tol > 0.0, "tol must be positive");
    assert!(opts.rho_scale > 1.0, "rho_scale must exceed 1");
}

/// Subproblem tolerance at outer iteration k: 10^−k floored at 1e−8, so
/// early subproblems are solved loosely and the tail tightly.
pub fn inexactness_tolerance(k: usize) -> f64 {
    10f64.powi(-(k.min(64) as i32)).max(1e-8)
}

/// One cached line-search trial: values are `None` when an oracle returned a
/// non-finite number there (the trial is then treated as rejected).
struct Trial {
    tau: f64,
    point: JointPoint,
    values: Option<(DVector<f64>, DVector<f64>)>,
}

/// Walk τ0, τ0/2, … looking for Φ_ρ(z+τd) ≤ (1−ητ)Φ_ρ(z); trials already in
/// the cache are reused (the cache persists across ρ escalations, whose merit
/// is recomputed from the same values).
fn search_cached(
    problem: &GnepProblem,
    base: &JointPoint,
    p: &DVector<f64>,
    q: &DVector<f64>,
    rho: f64,
    merit0: f64,
    opts: &SlcpOptions,
    cache: &mut Vec<Trial>,
) -> Result<Option<usize>, EvalError> {
    let mut tau = opts.tau0;
    for _ in 0..=opts.max_halvings {
        let idx = match cache.iter().position(|t| t.tau == tau) {
            Some(i) => i,
            None => {
                let point = JointPoint {
                    x: &base.x + tau * p,
                    lambda: (&base.lambda + tau * q).map(|v| v.max(0.0)),
                };
                let values = match problem.eval_values(&point) {
                    Ok((f, g)) => Some((f, g)),
                    Err(EvalError::NonFinite { .. }) => None,
                    Err(e) => return Err(e),
                };
                cache.push(Trial { tau, point, values });
                cache.len() - 1
            }
        };
        if let Some((f, g)) = &cache[idx].values {
            let merit = merit_from_values(f, g, &cache[idx].point.lambda, rho);
            if merit.total <= (1.0 - opts.eta * tau) * merit0 {
                return Ok(Some(idx));
            }
        }
        tau *= 0.5;
    }
    Ok(None)
}

/// Backtracking line search on the merit function, exposed for custom outer
/// loops. Returns the accepted step length, or `None` when every trial in
/// the halving schedule fails the sufficient-decrease test.
pub fn line_search(
    problem: &GnepProblem,
    point: &JointPoint,
    p: &DVector<f64>,
    q: &DVector<f64>,
    rho: f64,
    opts: &SlcpOptions,
) -> Result<Option<f64>, EvalError> {
    validate_options(opts);
    let (f, g) = problem.eval_values(point)?;
    let merit0 = merit_from_values(&f, &g, &point.lambda, rho).total;
    let mut cache = Vec::new();
    let found = search_cached(problem, point, p, q, rho, merit0, opts, &mut cache)?;
    Ok(found.map(|i| cache[i].tau))
}

/// Run the sequential linearization method from `start`. Oracle counters on
/// `problem` are reset first, so the result's trace reports the cost of this
/// run alone.
pub fn slcp_solve(
    problem: &GnepProblem,
    start: &JointPoint,
    opts: &SlcpOptions,
) -> Result<SolveResult, EvalError> {
    validate_options(opts);
    problem.check_point(start)?;
    assert!(
        start.lambda.iter().all(|&l| l >= 0.0),
        "start multipliers must be nonnegative"
    );
    problem.reset_counters();
    let mut z = start.clone();
    let mut rho = opts.rho;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut accepted = 0usize;

    for k in 0..opts.max_outer_iters {
        let data = problem.eval_kkt_data(&z)?;
        let counters = problem.counters();
        let res = kkt_residual_from_values(&data.f, &data.g, &z.lambda);
        let merit = merit_from_values(&data.f, &data.g, &z.lambda, rho);
        if res <= opts.tol {
            trace.push(IterationRecord {
                merit,
                kkt_residual: res,
                step: None,
                subproblem: None,
                counters,
            });
            return Ok(SolveResult {
                point: z,
                status: SolveStatus::Converged,
                kkt_residual: res,
                iterations: accepted,
                rho_final: rho,
                trace,
            });
        }
        let sub = match solve_subproblem(problem, &data, &z, inexactness_tolerance(k)) {
            Ok(s) => s,
            Err(_) => {
                trace.push(IterationRecord {
                    merit,
                    kkt_residual: res,
                    step: None,
                    subproblem: None,
                    counters,
                });
                return Ok(SolveResult {
                    point: z,
                    status: SolveStatus::SubproblemFailed,
                    kkt_residual: res,
                    iterations: accepted,
                    rho_final: rho,
                    trace,
                });
            }
        };
        // Line search, escalating ρ a bounded number of times on rejection.
        // The direction does not depend on ρ, so it is reused, and cached
        // trial values are re-scored instead of re-evaluated.
        let mut cache: Vec<Trial> = Vec::new();
        let mut accepted_idx: Option<usize> = None;
        for attempt in 0.. {
            let merit0 = merit_from_values(&data.f, &data.g, &z.lambda, rho).total;
            accepted_idx =
                search_cached(problem, &z, &sub.p, &sub.q, rho, merit0, opts, &mut cache)?;
            if accepted_idx.is_some() {
                break;
            }
            if !opts.rho_adapt || attempt >= 3 || rho >= RHO_MAX {
                break;
            }
            rho = (rho * opts.rho_scale).min(RHO_MAX);
        }
        match accepted_idx {
            Some(idx) => {
                trace.push(IterationRecord {
                    merit,
                    kkt_residual: res,
                    step: Some(cache[idx].tau),
                    subproblem: Some(sub.stats),
                    counters,
                });
                z = cache[idx].point.clone();
                accepted += 1;
            }
            None => {
                trace.push(IterationRecord {
                    merit,
                    kkt_residual: res,
                    step: None,
                    subproblem: Some(sub.stats),
                    counters,
                });
                return Ok(SolveResult {
                    point: z,
                    status: SolveStatus::LineSearchFailed,
                    kkt_residual: res,
                    iterations: accepted,
                    rho_final: rho,
                    trace,
                });
            }
        }
    }
    // Iteration budget exhausted: record the final iterate (values only).
    let (f, g) = problem.eval_values(&z)?;
    let res = kkt_residual_from_values(&f, &g, &z.lambda);
    trace.push(IterationRecord {
        merit: merit_from_values(&f, &g, &z.lambda, rho),
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
        rho_final: rho,
        trace,
    })
}
