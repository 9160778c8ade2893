//! Per-iteration linearized complementarity subproblem: find a step (p, q)
//! with
//!
//!   F + JxF·p + E·q = 0,   0 ≤ λ + q ⟂ −G − JxG·p ≥ 0.
//!
//! The mixed system is reduced to a standard LCP either by eliminating p
//! through JxF (general constraints) or, for pure nonnegativity-constrained
//! problems, by a substitution that needs no matrix inverse. A damped Newton
//! method on the Fischer–Burmeister reformulation of the mixed system serves
//! as a fallback when the reductions or the LCP solvers fail.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::lcp::{solve_lcp_ipm, solve_lcp_lm, LcpError, LcpSolveOptions, StandardLcp};
use crate::model::{GnepProblem, JointPoint, KktData};

/// Snapshot of one linearization: matrices and values from [`KktData`]
/// together with the base point they were evaluated at.
#[derive(Debug, Clone)]
pub struct MixedLcSubproblem {
    pub f: DVector<f64>,
    pub g: DVector<f64>,
    pub e: DMatrix<f64>,
    pub jxg: DMatrix<f64>,
    pub jxf: DMatrix<f64>,
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
}

pub fn assemble(data: &KktData, point: &JointPoint) -> MixedLcSubproblem {
    assert_eq!(data.f.len(), point.x.len(), "KKT data and point disagree on n");
    assert_eq!(data.g.len(), point.lambda.len(), "KKT data and point disagree on m");
    MixedLcSubproblem {
        f: data.f.clone(),
        g: data.g.clone(),
        e: data.e.clone(),
        jxg: data.jxg.clone(),
        jxf: data.jxf.clone(),
        x: point.x.clone(),
        lambda: point.lambda.clone(),
    }
}

/// Natural residual of the mixed system at a candidate step: the maximum of
/// the equation residual ‖F + JxF·p + E·q‖_∞ and the complementarity
/// residual ‖min(λ+q, −G − JxG·p)‖_∞.
pub fn mixed_residual(sub: &MixedLcSubproblem, p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    let eq = &sub.f + &sub.jxf * p + &sub.e * q;
    let mut res = if eq.len() > 0 { eq.amax() } else { 0.0 };
    let m = sub.lambda.len();
    if m > 0 {
        let z = &sub.lambda + q;
        let w = -&sub.g - &sub.jxg * p;
        for i in 0..m {
            res = res.max(z[i].min(w[i]).abs());
        }
    }
    res
}

#[derive(Debug, Error)]
pub enum SubproblemError {
    #[error("JxF numerically singular (condition estimate {condition_estimate:.3e})")]
    SingularJxF { condition_estimate: f64 },
    #[error("nonnegativity structure mismatch: {detail}")]
    StructureMismatch { detail: String },
    #[error(transparent)]
    Lcp(#[from] LcpError),
}

#[derive(Debug, Clone)]
enum Recovery {
    /// p = −(JxF⁻¹E)·q − JxF⁻¹F with q = z − λ.
    ViaInverse { jxf_inv_e: DMatrix<f64>, jxf_inv_f: DVector<f64>, lambda: DVector<f64> },
    /// z = [p + (x−l); λ_α + q_α]; bound multipliers come from the equation
    /// rows of their variables.
    Nonneg {
        x_minus_l: DVector<f64>,
        lambda: DVector<f64>,
        alpha: Vec<usize>,
        /// (constraint row, bound variable) pairs.
        beta: Vec<(usize, usize)>,
        jxf: DMatrix<f64>,
        e_alpha: DMatrix<f64>,
        f: DVector<f64>,
    },
}

/// A standard LCP equivalent to the mixed subproblem, with enough data to
/// map its solution back to a step (p, q).
#[derive(Debug, Clone)]
pub struct ReducedLcp {
    pub lcp: StandardLcp,
    /// Rough bound on how much a reduced-space residual can grow when mapped
    /// back: ‖JxF⁻¹‖·‖E‖ for the inverse-based reduction, 1 for the
    /// substitution-based one.
    pub amplification: f64,
    recovery: Recovery,
}

impl ReducedLcp {
    pub fn dim(&self) -> usize {
        self.lcp.dim()
    }

    /// Map a reduced solution back to (p, q). Entries of z are clamped at 0
    /// first, so λ + q ≥ 0 holds exactly for every recovered step.
    pub fn recover(&self, z: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        assert_eq!(z.len(), self.lcp.dim());
        let z = z.map(|t| t.max(0.0));
        match &self.recovery {
            Recovery::ViaInverse { jxf_inv_e, jxf_inv_f, lambda } => {
                let q = &z - lambda;
                let p = -(jxf_inv_e * &q) - jxf_inv_f;
                (p, q)
            }
            Recovery::Nonneg { x_minus_l, lambda, alpha, beta, jxf, e_alpha, f } => {
                let n = x_minus_l.len();
                let z1 = z.rows(0, n).into_owned();
                let z2 = z.rows(n, alpha.len()).into_owned();
                let p = &z1 - x_minus_l;
                let mut q = DVector::zeros(lambda.len());
                let mut q_alpha = DVector::zeros(alpha.len());
                for (k, &row) in alpha.iter().enumerate() {
                    q[row] = z2[k] - lambda[row];
                    q_alpha[k] = q[row];
                }
                if !beta.is_empty() {
                    let t = f + jxf * &p + e_alpha * &q_alpha;
                    for &(row, var) in beta {
                        q[row] = t[var].max(-lambda[row]);
                    }
                }
                (p, q)
            }
        }
    }
}

/// Threshold on the condition estimate of JxF beyond which the inverse-based
/// reduction refuses to proceed.
pub const SINGULARITY_CONDITION_LIMIT: f64 = 1e12;

/// Eliminate p = −JxF⁻¹(F + E·q), leaving the m-dimensional LCP in
/// λ̃ = λ + q with M = JxG·JxF⁻¹·E and h = −G − JxG·JxF⁻¹·(Eλ − F).
/// The natural residual is preserved exactly by the back-substitution.
pub fn reduce_via_inverse(sub: &MixedLcSubproblem) -> Result<ReducedLcp, SubproblemError> {
    let n = sub.f.len();
    let m = sub.g.len();
    let svd = sub.jxf.clone().svd(false, false);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let cond = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if !(cond < SINGULARITY_CONDITION_LIMIT) {
        return Err(SubproblemError::SingularJxF { condition_estimate: cond });
    }
    let lu = sub.jxf.clone().lu();
    let jxf_inv_e = lu.solve(&sub.e).expect("LU solve after condition check");
    let jxf_inv_f = lu.solve(&sub.f).expect("LU solve after condition check");
    let _ = n;
    let m_mat = &sub.jxg * &jxf_inv_e;
    let h = -&sub.g - &sub.jxg * (&jxf_inv_e * &sub.lambda - &jxf_inv_f);
    let e_norm = if m > 0 { sub.e.clone().svd(false, false).singular_values.max() } else { 0.0 };
    let amplification = if s_min > 0.0 { e_norm / s_min } else { f64::INFINITY };
    Ok(ReducedLcp {
        lcp: StandardLcp::new(m_mat, h),
        amplification,
        recovery: Recovery::ViaInverse {
            jxf_inv_e,
            jxf_inv_f,
            lambda: sub.lambda.clone(),
        },
    })
}

/// Inverse-free reduction for problems whose variables all carry simple
/// lower bounds. Each declared nonnegative variable must own a constraint
/// row of the form l_i − x_i ≤ 0 (Jacobian row −e_iᵀ, owned by the
/// variable's player); those rows become implicit in the substitution
/// z₁ = p + (x − l) ≥ 0 and only the remaining rows stay in the LCP:
///
///   M = [[JxF, E_α], [−JxG_α, 0]],
///   h = [F − E_α λ_α + λ_β − JxF(x−l); −G_α + JxG_α(x−l)].
///
/// If no bound rows exist at all the same substitution is applied with
/// l = 0 and every row kept in α; the equation rows then appear as the
/// complementary slacks of z₁, which is consistent whenever the step keeps
/// the iterate componentwise positive.
pub fn reduce_nonneg(
    sub: &MixedLcSubproblem,
    problem: &GnepProblem,
) -> Result<ReducedLcp, SubproblemError> {
    let n = sub.f.len();
    let m = sub.g.len();
    let mut declared = problem.nonneg_variable_indices.clone();
    declared.sort_unstable();
    declared.dedup();
    if declared.len() != n || declared.iter().enumerate().any(|(i, &v)| i != v) {
        return Err(SubproblemError::StructureMismatch {
            detail: format!(
                "nonnegativity declarations cover {} of {} variables",
                declared.len(),
                n
            ),
        });
    }
    // Locate the bound row of each variable: first row owned by the
    // variable's player whose Jacobian is exactly −e_iᵀ.
    let mut bound_row: Vec<Option<usize>> = vec![None; n];
    let mut is_bound_row = vec![false; m];
    for nu in 0..problem.num_players() {
        let vr = problem.var_range(nu);
        for row in problem.con_range(nu) {
            let mut var: Option<usize> = None;
            let mut clean = true;
            for col in 0..n {
                let a = sub.jxg[(row, col)];
                if (a + 1.0).abs() <= 1e-12 && vr.contains(&col) {
                    if var.is_some() {
                        clean = false;
                        break;
                    }
                    var = Some(col);
                } else if a.abs() > 1e-12 {
                    clean = false;
                    break;
                }
            }
            if clean {
                if let Some(i) = var {
                    if bound_row[i].is_none() {
                        bound_row[i] = Some(row);
                        is_bound_row[row] = true;
                    }
                }
            }
        }
    }
    let matched = bound_row.iter().filter(|r| r.is_some()).count();
    let (x_minus_l, lambda_beta, beta): (DVector<f64>, DVector<f64>, Vec<(usize, usize)>) =
        if matched == n {
            let mut xl = DVector::zeros(n);
            let mut lb = DVector::zeros(n);
            let mut beta = Vec::with_capacity(n);
            for i in 0..n {
                let row = bound_row[i].unwrap();
                // g_row = l_i − x_i, so x_i − l_i = −g_row.
                xl[i] = -sub.g[row];
                lb[i] = sub.lambda[row];
                beta.push((row, i));
            }
            (xl, lb, beta)
        } else if matched == 0 {
            (sub.x.clone(), DVector::zeros(n), Vec::new())
        } else {
            return Err(SubproblemError::StructureMismatch {
                detail: format!("bound rows found for {matched} of {n} declared variables"),
            });
        };
    let alpha: Vec<usize> = (0..m).filter(|&r| !is_bound_row[r]).collect();
    let ma = alpha.len();
    let mut e_alpha = DMatrix::zeros(n, ma);
    let mut jxg_alpha = DMatrix::zeros(ma, n);
    let mut g_alpha = DVector::zeros(ma);
    let mut lambda_alpha = DVector::zeros(ma);
    for (k, &row) in alpha.iter().enumerate() {
        e_alpha.set_column(k, &sub.e.column(row));
        jxg_alpha.set_row(k, &sub.jxg.row(row));
        g_alpha[k] = sub.g[row];
        lambda_alpha[k] = sub.lambda[row];
    }
    let dim = n + ma;
    let mut m_mat = DMatrix::zeros(dim, dim);
    m_mat.view_mut((0, 0), (n, n)).copy_from(&sub.jxf);
    m_mat.view_mut((0, n), (n, ma)).copy_from(&e_alpha);
    m_mat.view_mut((n, 0), (ma, n)).copy_from(&(-&jxg_alpha));
    let mut h = DVector::zeros(dim);
    let h1 = &sub.f - &e_alpha * &lambda_alpha + &lambda_beta - &sub.jxf * &x_minus_l;
    let h2 = -&g_alpha + &jxg_alpha * &x_minus_l;
    h.rows_mut(0, n).copy_from(&h1);
    h.rows_mut(n, ma).copy_from(&h2);
    Ok(ReducedLcp {
        lcp: StandardLcp::new(m_mat, h),
        amplification: 1.0,
        recovery: Recovery::Nonneg {
            x_minus_l,
            lambda: sub.lambda.clone(),
            alpha,
            beta,
            jxf: sub.jxf.clone(),
            e_alpha,
            f: sub.f.clone(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubproblemSolverKind {
    LevenbergMarquardt,
    InteriorPoint,
    NewtonFallback,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubproblemStats {
    pub reduced_dim: usize,
    pub solver: SubproblemSolverKind,
    pub lcp_iterations: usize,
    /// Natural residual of the mixed system at the returned step.
    pub mixed_residual: f64,
    pub amplification: f64,
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub p: DVector<f64>,
    pub q: DVector<f64>,
    pub stats: SubproblemStats,
}

/// Reduced dimension above which the interior-point method is preferred
/// over the Levenberg–Marquardt method.
pub const LM_DIMENSION_LIMIT: usize = 100;

/// Solve one linearized subproblem to the requested mixed-system tolerance.
///
/// Dispatch: the inverse-free reduction when every variable is declared
/// nonnegative, otherwise the inverse-based one; then the LM solver for
/// reduced dimension ≤ 100, the interior-point method above. On failure the
/// other LCP solver is tried, then a damped Newton fallback on the mixed
/// system itself (which also covers singular JxF).
pub fn solve_subproblem(
    problem: &GnepProblem,
    data: &KktData,
    point: &JointPoint,
    tol: f64,
) -> Result<SubproblemSolution, SubproblemError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let sub = assemble(data, point);
    let n = problem.n();
    let covers_all = {
        let mut d = problem.nonneg_variable_indices.clone();
        d.sort_unstable();
        d.dedup();
        d.len() == n && d.iter().enumerate().all(|(i, &v)| i == v)
    };
    let reduced = if covers_all {
        reduce_nonneg(&sub, problem)
    } else {
        reduce_via_inverse(&sub)
    };
    let mut last_err: SubproblemError;
    match reduced {
        Ok(red) => {
            let mut opts = LcpSolveOptions::default();
            opts.tol = 0.9 * tol;
            let order = if red.dim() <= LM_DIMENSION_LIMIT {
                [SubproblemSolverKind::LevenbergMarquardt, SubproblemSolverKind::InteriorPoint]
            } else {
                [SubproblemSolverKind::InteriorPoint, SubproblemSolverKind::LevenbergMarquardt]
            };
            last_err = SubproblemError::Lcp(LcpError::NonConvergence { final_residual: f64::NAN });
            for kind in order {
                let attempt = match kind {
                    SubproblemSolverKind::LevenbergMarquardt => {
                        // the small-system solver is cheap enough to polish to
                        // full accuracy even when the caller would accept a
                        // looser answer; loose early directions stall the
                        // outer line search once the residual is already small
                        let mut lm_opts = opts.clone();
                        lm_opts.tol = opts.tol.min(1e-8);
                        solve_lcp_lm(&red.lcp, &lm_opts)
                    }
                    _ => solve_lcp_ipm(&red.lcp, &opts),
                };
                match attempt {
                    Ok(sol) => {
                        let (p, q) = red.recover(&sol.z);
                        let res = mixed_residual(&sub, &p, &q);
                        if res <= tol {
                            return Ok(SubproblemSolution {
                                p,
                                q,
                                stats: SubproblemStats {
                                    reduced_dim: red.dim(),
                                    solver: kind,
                                    lcp_iterations: sol.iterations,
                                    mixed_residual: res,
                                    amplification: red.amplification,
                                },
                            });
                        }
                        last_err = SubproblemError::Lcp(LcpError::NonConvergence {
                            final_residual: res,
                        });
                    }
                    Err(e) => last_err = SubproblemError::Lcp(e),
                }
            }
        }
        Err(e) => last_err = e,
    }
    match newton_fallback(&sub, tol) {
        Ok((p, q, iters, res)) => Ok(SubproblemSolution {
            p,
            q,
            stats: SubproblemStats {
                reduced_dim: n + problem.m(),
                solver: SubproblemSolverKind::NewtonFallback,
                lcp_iterations: iters,
                mixed_residual: res,
                amplification: 1.0,
            },
        }),
        Err(_) => Err(last_err),
    }
}

fn fb(a: f64, b: f64) -> f64 {
    a.hypot(b) - a - b
}

/// Damped Gauss–Newton on the square map
/// Ψ(p,q) = [F + JxF·p + E·q; φ_FB(λ+q, −G − JxG·p)] with a fixed Tikhonov
/// term 1e−8·I. Tolerates singular JxF; used only as a fallback.
fn newton_fallback(
    sub: &MixedLcSubproblem,
    tol: f64,
) -> Result<(DVector<f64>, DVector<f64>, usize, f64), LcpError> {
    let n = sub.f.len();
    let m = sub.g.len();
    let dim = n + m;
    let mut p = DVector::zeros(n);
    let mut q = DVector::zeros(m);
    let psi = |p: &DVector<f64>, q: &DVector<f64>| -> DVector<f64> {
        let eq = &sub.f + &sub.jxf * p + &sub.e * q;
        let z = &sub.lambda + q;
        let w = -&sub.g - &sub.jxg * p;
        let mut out = DVector::zeros(dim);
        out.rows_mut(0, n).copy_from(&eq);
        for i in 0..m {
            out[n + i] = fb(z[i], w[i]);
        }
        out
    };
    let mut sigma = 1e-4;
    let tie = std::f64::consts::FRAC_1_SQRT_2 - 1.0;
    let mut r = psi(&p, &q);
    for it in 0..500 {
        let res = mixed_residual(sub, &p, &q);
        if res <= tol {
            let qc = finalize_fallback_q(sub, &q);
            let resc = mixed_residual(sub, &p, &qc);
            if resc <= tol {
                return Ok((p, qc, it, resc));
            }
        }
        let z = &sub.lambda + &q;
        let w = -&sub.g - &sub.jxg * &p;
        let mut j = DMatrix::zeros(dim, dim);
        j.view_mut((0, 0), (n, n)).copy_from(&sub.jxf);
        j.view_mut((0, n), (n, m)).copy_from(&sub.e);
        for i in 0..m {
            let rr = z[i].hypot(w[i]);
            let (da, db) = if rr <= 1e-14 { (tie, tie) } else { (z[i] / rr - 1.0, w[i] / rr - 1.0) };
            for col in 0..n {
                j[(n + i, col)] = -db * sub.jxg[(i, col)];
            }
            j[(n + i, n + i)] = da;
        }
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let r2 = r.norm_squared();
        loop {
            let mut a = jtj.clone();
            for i in 0..dim {
                a[(i, i)] += 1e-8 + sigma;
            }
            let d = match a.cholesky() {
                Some(c) => c.solve(&(-&g)),
                None => return Err(LcpError::SingularSystem),
            };
            let pt = &p + d.rows(0, n);
            let qt = &q + d.rows(n, m);
            let rt = psi(&pt, &qt);
            let model = &r + &j * &d;
            let predicted = r2 - model.norm_squared();
            let actual = r2 - rt.norm_squared();
            if predicted > 0.0 && actual / predicted >= 1e-4 {
                p = pt;
                q = qt;
                r = rt;
                sigma = (sigma / 5.0).max(1e-10);
                break;
            }
            sigma *= 5.0;
            if sigma > 1e14 {
                return Err(LcpError::NonConvergence {
                    final_residual: mixed_residual(sub, &p, &q),
                });
            }
        }
    }
    Err(LcpError::NonConvergence { final_residual: mixed_residual(sub, &p, &q) })
}

/// The fallback iterates do not maintain λ + q ≥ 0; clamp before returning.
fn finalize_fallback_q(sub: &MixedLcSubproblem, q: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(q.len(), |i, _| q[i].max(-sub.lambda[i]))
}
