//! Solution diagnostics: monotonicity constants of the linearized KKT map,
//! active-set classification with a confidence band, semistability and
//! strong-regularity checks by enumerating the piecewise-linear branches of
//! the critical system, a sampled error-bound constant, and a sampled
//! hemistability (perturbed-subproblem) check.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::cone_nontrivial_ray;
use crate::kkt::kkt_residual_from_values;
use crate::lcp::solve_lcp_bruteforce;
use crate::model::{EvalError, GnepProblem, JointPoint};
use crate::subproblem::{assemble, reduce_nonneg, reduce_via_inverse};

/// Suggested activity tolerance for solver-computed points.
pub const ACT_TOL_COMPUTED: f64 = 1e-6;
/// Suggested activity tolerance for closed-form / exact points.
pub const ACT_TOL_CLOSED_FORM: f64 = 1e-10;

/// Branch-enumeration cap for the semistability check (2^|I₀| systems).
pub const SEMISTABILITY_BRANCH_LIMIT: usize = 12;
/// Partition-enumeration cap for the strong-regularity check (3^|I₀|).
pub const STRONG_REGULARITY_BRANCH_LIMIT: usize = 8;

/// Constants describing how well-conditioned the linearization is at a
/// point: `alpha` = ‖JxF⁻¹‖ (∞ when singular) and `beta_max` the largest β
/// with sym(JxG·JxF⁻¹·E) ⪰ β·JxG·JxGᵀ. `beta_max` is `None` when the
/// condition is vacuous (no constraints, zero constraint Jacobian, or
/// singular JxF); `Some(0.0)` means the reduced map is not even positively
/// semidefinite along the constraint rows.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonotonicityEstimate {
    pub alpha: f64,
    pub beta_max: Option<f64>,
}

pub fn estimate_monotonicity(
    problem: &GnepProblem,
    point: &JointPoint,
) -> Result<MonotonicityEstimate, EvalError> {
    let data = problem.eval_kkt_data(point)?;
    let svd = data.jxf.clone().svd(false, false);
    let s_min = svd.singular_values.min();
    let alpha = if s_min > 0.0 { 1.0 / s_min } else { f64::INFINITY };
    let m = problem.m();
    if m == 0 || data.jxg.amax() == 0.0 || s_min == 0.0 {
        return Ok(MonotonicityEstimate { alpha, beta_max: None });
    }
    let lu = data.jxf.clone().lu();
    let jxf_inv_e = match lu.solve(&data.e) {
        Some(v) => v,
        None => return Ok(MonotonicityEstimate { alpha, beta_max: None }),
    };
    let c = &data.jxg * &jxf_inv_e;
    let sym_c = (&c + c.transpose()) * 0.5;
    let d = &data.jxg * data.jxg.transpose();
    let d_eigs = SymmetricEigen::new(d.clone()).eigenvalues;
    let d_max = d_eigs.max();
    let sigma_plus_min = d_eigs
        .iter()
        .copied()
        .filter(|&v| v > 1e-12 * d_max)
        .fold(f64::INFINITY, f64::min);
    let c_norm = c.clone().svd(false, false).singular_values.max();
    let hi = c_norm / sigma_plus_min + 1.0;

    let psd_at = |beta: f64| -> bool {
        let probe = &sym_c - &d * beta;
        let eigs = SymmetricEigen::new(probe).eigenvalues;
        let scale = sym_c.amax().max(beta * d.amax()).max(1.0);
        eigs.min() >= -1e-10 * scale
    };
    if !psd_at(0.0) {
        return Ok(MonotonicityEstimate { alpha, beta_max: Some(0.0) });
    }
    if psd_at(hi) {
        return Ok(MonotonicityEstimate { alpha, beta_max: Some(hi) });
    }
    let (mut lo, mut hi) = (0.0f64, hi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if psd_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MonotonicityEstimate { alpha, beta_max: Some(lo) })
}

/// Partition of the constraint rows at a candidate KKT point:
/// strongly active (g ≈ 0, λ clearly positive), degenerate (g ≈ 0 and
/// λ ≈ 0), inactive (g clearly negative). Indices whose activity or
/// multiplier magnitude falls in the ambiguous band
/// (0.1·act_tol, 10·act_tol) — or that look inactive while carrying a
/// clearly positive multiplier — are additionally listed as inconclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexClassification {
    pub i_plus: Vec<usize>,
    pub i_zero: Vec<usize>,
    pub i_minus: Vec<usize>,
    pub inconclusive: Vec<usize>,
}

pub fn classify_indices(
    g: &DVector<f64>,
    lambda: &DVector<f64>,
    act_tol: f64,
) -> IndexClassification {
    assert_eq!(g.len(), lambda.len());
    assert!(act_tol > 0.0, "activity tolerance must be positive");
    let mut out = IndexClassification {
        i_plus: vec![],
        i_zero: vec![],
        i_minus: vec![],
        inconclusive: vec![],
    };
    let in_band = |v: f64| v > 0.1 * act_tol && v < 10.0 * act_tol;
    for i in 0..g.len() {
        let active = g[i].abs() <= act_tol;
        let lam_zero = lambda[i] <= act_tol;
        match (active, lam_zero) {
            (true, false) => out.i_plus.push(i),
            (true, true) => out.i_zero.push(i),
            (false, _) => out.i_minus.push(i),
        }
        let contradictory = !active && lambda[i] >= 10.0 * act_tol;
        if in_band(g[i].abs()) || in_band(lambda[i]) || contradictory {
            out.inconclusive.push(i);
        }
    }
    out
}

/// Tri-state outcome of a property check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

fn rows_to_matrix(rows: &[DVector<f64>], width: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows.len(), width);
    for (i, r) in rows.iter().enumerate() {
        m.row_mut(i).copy_from(&r.transpose());
    }
    m
}

fn unit(dim: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[i] = 1.0;
    v
}

/// Row of [Δx-part | Δλ-part] with the Δx part taken from `jxg` row `i`.
fn jxg_row_padded(jxg: &DMatrix<f64>, i: usize, m: usize) -> DVector<f64> {
    let n = jxg.ncols();
    let mut v = DVector::zeros(n + m);
    for col in 0..n {
        v[col] = jxg[(i, col)];
    }
    v
}

/// Semistability: no branch of the linearized critical system
///
///   JxF·Δx + E·Δλ = 0,
///   (𝒥g)_i·Δx = 0              on I₊,
///   Δλ_i = 0                    on I₋,
///   {Δλ_i = 0, −(𝒥g)_i·Δx ≥ 0} or {(𝒥g)_i·Δx = 0, Δλ_i ≥ 0}  on I₀,
///
/// admits a nonzero solution. All 2^|I₀| branches are enumerated;
/// `Inconclusive` when the classification is ambiguous or I₀ is too large.
pub fn check_semistability(
    problem: &GnepProblem,
    point: &JointPoint,
    act_tol: f64,
) -> Result<Verdict, EvalError> {
    let data = problem.eval_kkt_data(point)?;
    let cls = classify_indices(&data.g, &point.lambda, act_tol);
    if !cls.inconclusive.is_empty() {
        return Ok(Verdict::Inconclusive);
    }
    if cls.i_zero.len() > SEMISTABILITY_BRANCH_LIMIT {
        return Ok(Verdict::Inconclusive);
    }
    let n = problem.n();
    let m = problem.m();
    let dim = n + m;
    // rows shared by every branch
    let mut base_eq: Vec<DVector<f64>> = Vec::new();
    for r in 0..n {
        let mut row = DVector::zeros(dim);
        for col in 0..n {
            row[col] = data.jxf[(r, col)];
        }
        for col in 0..m {
            row[n + col] = data.e[(r, col)];
        }
        base_eq.push(row);
    }
    for &i in &cls.i_plus {
        base_eq.push(jxg_row_padded(&data.jxg, i, m));
    }
    for &i in &cls.i_minus {
        base_eq.push(unit(dim, n + i));
    }
    for mask in 0u32..(1u32 << cls.i_zero.len()) {
        let mut eq = base_eq.clone();
        let mut ineq: Vec<DVector<f64>> = Vec::new();
        for (k, &i) in cls.i_zero.iter().enumerate() {
            if mask & (1 << k) == 0 {
                // Δλ_i = 0, −(𝒥g)_i·Δx ≥ 0
                eq.push(unit(dim, n + i));
                ineq.push(-jxg_row_padded(&data.jxg, i, m));
            } else {
                // (𝒥g)_i·Δx = 0, Δλ_i ≥ 0
                eq.push(jxg_row_padded(&data.jxg, i, m));
                ineq.push(unit(dim, n + i));
            }
        }
        let a = rows_to_matrix(&eq, dim);
        let b = rows_to_matrix(&ineq, dim);
        if cone_nontrivial_ray(&a, &b).is_some() {
            return Ok(Verdict::Fails);
        }
    }
    Ok(Verdict::Holds)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StrongRegularityResult {
    pub verdict: Verdict,
    /// True when an active constraint row has entries in other players'
    /// variable blocks; the own-block test is then only a heuristic.
    pub cross_player_active_rows: bool,
}

/// Constraint row i's owning player.
fn owner_of_row(problem: &GnepProblem, i: usize) -> usize {
    (0..problem.num_players())
        .find(|&nu| problem.con_range(nu).contains(&i))
        .expect("row index within m")
}

/// Strong regularity: no partition (J₊, J₀, J₋) of I₀ gives the system
///
///   JxFᵀ·Δx − JxGᵀ·Δλ = 0,
///   (∇_{x^ν} g_i)·Δx^ν = 0    on I₊ ∪ J₊   (own-block row),
///   Δλ_i = 0                   on I₋ ∪ J₋,
///   −Δλ_i ≥ 0 and (∇_{x^ν} g_i)·Δx^ν ≥ 0  on J₀,
///
/// a nonzero solution. All 3^|I₀| partitions are enumerated.
pub fn check_strong_regularity(
    problem: &GnepProblem,
    point: &JointPoint,
    act_tol: f64,
) -> Result<StrongRegularityResult, EvalError> {
    let data = problem.eval_kkt_data(point)?;
    let cls = classify_indices(&data.g, &point.lambda, act_tol);
    let n = problem.n();
    let m = problem.m();
    let dim = n + m;

    let scale = data.jxg.amax().max(1.0);
    let mut cross = false;
    for &i in cls.i_plus.iter().chain(cls.i_zero.iter()) {
        let nu = owner_of_row(problem, i);
        let vr = problem.var_range(nu);
        for col in 0..n {
            if !vr.contains(&col) && data.jxg[(i, col)].abs() > 1e-12 * scale {
                cross = true;
            }
        }
    }

    if !cls.inconclusive.is_empty() || cls.i_zero.len() > STRONG_REGULARITY_BRANCH_LIMIT {
        return Ok(StrongRegularityResult {
            verdict: Verdict::Inconclusive,
            cross_player_active_rows: cross,
        });
    }

    // own-block row of constraint i, padded to [Δx | Δλ] width
    let own_row = |i: usize| -> DVector<f64> {
        let nu = owner_of_row(problem, i);
        let vr = problem.var_range(nu);
        let mut v = DVector::zeros(dim);
        for col in vr {
            v[col] = data.jxg[(i, col)];
        }
        v
    };

    let mut base_eq: Vec<DVector<f64>> = Vec::new();
    for r in 0..n {
        let mut row = DVector::zeros(dim);
        for col in 0..n {
            row[col] = data.jxf[(col, r)]; // JxFᵀ
        }
        for col in 0..m {
            row[n + col] = -data.jxg[(col, r)]; // −JxGᵀ
        }
        base_eq.push(row);
    }
    for &i in &cls.i_plus {
        base_eq.push(own_row(i));
    }
    for &i in &cls.i_minus {
        base_eq.push(unit(dim, n + i));
    }

    let k = cls.i_zero.len();
    let total = 3usize.pow(k as u32);
    for assignment in 0..total {
        let mut eq = base_eq.clone();
        let mut ineq: Vec<DVector<f64>> = Vec::new();
        let mut code = assignment;
        for &i in &cls.i_zero {
            match code % 3 {
                0 => eq.push(own_row(i)),       // J₊
                1 => eq.push(unit(dim, n + i)), // J₋
                _ => {
                    // J₀
                    ineq.push(-unit(dim, n + i));
                    ineq.push(own_row(i));
                }
            }
            code /= 3;
        }
        let a = rows_to_matrix(&eq, dim);
        let b = rows_to_matrix(&ineq, dim);
        if cone_nontrivial_ray(&a, &b).is_some() {
            return Ok(StrongRegularityResult {
                verdict: Verdict::Fails,
                cross_player_active_rows: cross,
            });
        }
    }
    Ok(StrongRegularityResult { verdict: Verdict::Holds, cross_player_active_rows: cross })
}

pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; u clamped away from 0
    let u: f64 = rng.gen::<f64>().max(1e-300);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Uniformly distributed point in the ball of radius `radius` around 0 in
/// dimension `dim`.
fn ball_sample(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> DVector<f64> {
    let mut dir = DVector::from_fn(dim, |_, _| standard_normal(rng));
    let norm = dir.norm();
    if norm == 0.0 {
        return DVector::zeros(dim);
    }
    dir /= norm;
    let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    dir * (radius * u.powf(1.0 / dim as f64))
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeOptions {
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { samples: 200, radius: 1e-3, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorBoundProbe {
    /// Largest observed ratio distance / residual; `None` when every sample
    /// was skipped.
    pub constant: Option<f64>,
    pub samples_used: usize,
    /// Samples dropped for a non-finite evaluation or a residual below the
    /// denominator guard.
    pub skipped: usize,
}

/// Sample the local error-bound ratio
/// (‖x − x̄‖ + ‖λ − λ̄‖) / (‖F(x,λ)‖ + ‖min(λ, −G(x))‖) at perturbations of
/// the reference pair (multipliers projected onto λ ≥ 0) and report the
/// largest value seen. Finite values support a local error bound with that
/// constant on the sampled ball.
pub fn probe_error_bound(
    problem: &GnepProblem,
    reference: &JointPoint,
    opts: &ProbeOptions,
) -> Result<ErrorBoundProbe, EvalError> {
    assert!(opts.radius > 0.0, "probe radius must be positive");
    problem.check_point(reference)?;
    let n = problem.n();
    let m = problem.m();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<f64> = None;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for _ in 0..opts.samples {
        let d = ball_sample(&mut rng, n + m, opts.radius);
        let x = &reference.x + d.rows(0, n);
        let lambda = (&reference.lambda + d.rows(n, m)).map(|v| v.max(0.0));
        let sample = JointPoint::new(x, lambda);
        let (f, g) = match problem.eval_values(&sample) {
            Ok(v) => v,
            Err(EvalError::NonFinite { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let nat = DVector::from_fn(m, |i, _| sample.lambda[i].min(-g[i]));
        let denom = f.norm() + nat.norm();
        if denom < 1e-14 {
            skipped += 1;
            continue;
        }
        let numer = (&sample.x - &reference.x).norm() + (&sample.lambda - &reference.lambda).norm();
        let ratio = numer / denom;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
        used += 1;
    }
    Ok(ErrorBoundProbe { constant: best, samples_used: used, skipped })
}

#[derive(Debug, Clone, Copy)]
pub struct HemistabilityOptions {
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
    /// A perturbed subproblem passes when some solution maps back within
    /// this distance of the reference pair.
    pub delta: f64,
}

impl Default for HemistabilityOptions {
    fn default() -> Self {
        Self { samples: 20, radius: 0.1, seed: 0, delta: 0.25 }
    }
}

/// Check the linearized subproblem at one perturbed point: enumerate *all*
/// solutions of its reduced LCP and test whether any recovered step lands
/// within `delta` of the reference pair. `Fails` when there are solutions
/// but none nearby, or none at all; `Inconclusive` when the reduction fails
/// or the reduced dimension exceeds the enumeration limit.
pub fn hemistability_at(
    problem: &GnepProblem,
    reference: &JointPoint,
    perturbed: &JointPoint,
    delta: f64,
) -> Result<Verdict, EvalError> {
    let data = problem.eval_kkt_data(perturbed)?;
    let sub = assemble(&data, perturbed);
    let covers_all = {
        let mut d = problem.nonneg_variable_indices.clone();
        d.sort_unstable();
        d.dedup();
        d.len() == problem.n() && d.iter().enumerate().all(|(i, &v)| i == v)
    };
    let red = if covers_all {
        reduce_nonneg(&sub, problem)
    } else {
        reduce_via_inverse(&sub)
    };
    let red = match red {
        Ok(r) => r,
        Err(_) => return Ok(Verdict::Inconclusive),
    };
    let sols = match solve_lcp_bruteforce(&red.lcp) {
        Ok(s) => s,
        Err(_) => return Ok(Verdict::Inconclusive),
    };
    if sols.is_empty() {
        return Ok(Verdict::Fails);
    }
    let mut min_dist = f64::INFINITY;
    for z in &sols {
        let (p, q) = red.recover(z);
        let x_new = &perturbed.x + p;
        let l_new = &perturbed.lambda + q;
        let dist = (&x_new - &reference.x).norm() + (&l_new - &reference.lambda).norm();
        min_dist = min_dist.min(dist);
    }
    Ok(if min_dist <= delta { Verdict::Holds } else { Verdict::Fails })
}

/// Sampled hemistability around a reference pair: every sampled perturbation
/// must admit a nearby subproblem solution. A single far-only sample makes
/// the verdict `Fails`; samples the enumeration cannot certify make it
/// `Inconclusive` (unless a failure was found).
pub fn check_hemistability_sample(
    problem: &GnepProblem,
    reference: &JointPoint,
    opts: &HemistabilityOptions,
) -> Result<Verdict, EvalError> {
    problem.check_point(reference)?;
    let n = problem.n();
    let m = problem.m();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut saw_inconclusive = false;
    for _ in 0..opts.samples {
        let d = ball_sample(&mut rng, n + m, opts.radius);
        let perturbed = JointPoint::new(
            &reference.x + d.rows(0, n),
            (&reference.lambda + d.rows(n, m)).map(|v| v.max(0.0)),
        );
        match hemistability_at(problem, reference, &perturbed, opts.delta)? {
            Verdict::Fails => return Ok(Verdict::Fails),
            Verdict::Inconclusive => saw_inconclusive = true,
            Verdict::Holds => {}
        }
    }
    Ok(if saw_inconclusive { Verdict::Inconclusive } else { Verdict::Holds })
}

#[derive(Debug, Clone)]
pub struct DiagnoseOptions {
    pub act_tol: f64,
    pub probe: Option<ProbeOptions>,
    pub hemistability: Option<HemistabilityOptions>,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            act_tol: ACT_TOL_COMPUTED,
            probe: Some(ProbeOptions::default()),
            hemistability: None,
        }
    }
}

/// Bundle of every diagnostic at one point, serializable as a JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub problem: String,
    pub point: JointPoint,
    pub kkt_residual: f64,
    pub act_tol: f64,
    pub monotonicity: MonotonicityEstimate,
    pub classification: IndexClassification,
    pub semistable: Verdict,
    pub strongly_regular: Verdict,
    pub cross_player_active_rows: bool,
    pub error_bound: Option<ErrorBoundProbe>,
    pub hemistability: Option<Verdict>,
}

pub fn diagnose(
    problem: &GnepProblem,
    point: &JointPoint,
    opts: &DiagnoseOptions,
) -> Result<DiagnosticsReport, EvalError> {
    let data = problem.eval_kkt_data(point)?;
    let kkt_residual = kkt_residual_from_values(&data.f, &data.g, &point.lambda);
    let monotonicity = estimate_monotonicity(problem, point)?;
    let classification = classify_indices(&data.g, &point.lambda, opts.act_tol);
    let semistable = check_semistability(problem, point, opts.act_tol)?;
    let sr = check_strong_regularity(problem, point, opts.act_tol)?;
    let error_bound = match &opts.probe {
        Some(p) => Some(probe_error_bound(problem, point, p)?),
        None => None,
    };
    let hemistability = match &opts.hemistability {
        Some(h) => Some(check_hemistability_sample(problem, point, h)?),
        None => None,
    };
    Ok(DiagnosticsReport {
        problem: problem.name.clone(),
        point: point.clone(),
        kkt_residual,
        act_tol: opts.act_tol,
        monotonicity,
        classification,
        semistable,
        strongly_regular: sr.verdict,
        cross_player_active_rows: sr.cross_player_active_rows,
        error_bound,
        hemistability,
    })
}
