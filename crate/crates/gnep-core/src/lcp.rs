//! Standard linear complementarity problems 0 ≤ z ⟂ Mz + h ≥ 0: residuals,
//! two iterative solvers (a Fischer–Burmeister Levenberg–Marquardt method
//! and an infeasible-start interior-point method), an exhaustive
//! pattern-enumeration oracle for small instances, and a solvability
//! certificate for positive semidefinite M.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::cone::{null_space, pointed_cone_rays};

/// A standard LCP: find z ≥ 0 with Mz + h ≥ 0 and zᵀ(Mz + h) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLcp {
    pub m: DMatrix<f64>,
    pub h: DVector<f64>,
}

impl StandardLcp {
    pub fn new(m: DMatrix<f64>, h: DVector<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "LCP matrix must be square");
        assert_eq!(m.nrows(), h.len(), "LCP offset length must match");
        assert!(
            m.iter().all(|t| t.is_finite()) && h.iter().all(|t| t.is_finite()),
            "LCP data must be finite"
        );
        Self { m, h }
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }
}

/// Solver options shared by both iterative methods.
#[derive(Debug, Clone)]
pub struct LcpSolveOptions {
    /// Target natural residual ‖min(z, Mz+h)‖_∞.
    pub tol: f64,
    pub max_iters: usize,
    /// Damping floor for the Levenberg–Marquardt method.
    pub lm_sigma_min: f64,
    /// Top of the damping operating band; the start value is the geometric
    /// mean of the band. Damping may exceed the band transiently on
    /// consecutive rejected steps.
    pub lm_sigma_max: f64,
    /// Multiplier/divisor applied to the damping on rejected/accepted steps.
    pub lm_scale: f64,
    /// Centering parameter σ of the interior-point method, in (0,1).
    pub ipm_centering: f64,
    /// Fraction-to-boundary coefficient of the interior-point step.
    pub ipm_step_fraction: f64,
}

impl Default for LcpSolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 500,
            lm_sigma_min: 1e-5,
            lm_sigma_max: 1e-3,
            lm_scale: 5.0,
            ipm_centering: 0.2,
            ipm_step_fraction: 0.9995,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LcpSolution {
    pub z: DVector<f64>,
    pub iterations: usize,
    /// Natural residual at the returned point.
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum LcpError {
    #[error("LCP solver did not converge: final natural residual {final_residual:.3e}")]
    NonConvergence { final_residual: f64 },
    #[error("damped normal equations numerically singular at damping ceiling")]
    SingularSystem,
    #[error("Newton system ill-conditioned (condition estimate {condition_estimate:.3e})")]
    IllConditioned { condition_estimate: f64 },
    #[error("dimension {dim} exceeds the enumeration limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },
}

/// Natural residual ‖min(z, Mz + h)‖_∞; zero exactly at solutions.
pub fn lcp_residual(lcp: &StandardLcp, z: &DVector<f64>) -> f64 {
    assert_eq!(z.len(), lcp.dim());
    if lcp.dim() == 0 {
        return 0.0;
    }
    let w = &lcp.m * z + &lcp.h;
    (0..z.len())
        .map(|i| z[i].min(w[i]).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn fb_component(a: f64, b: f64) -> f64 {
    a.hypot(b) - a - b
}

/// Componentwise Fischer–Burmeister residual φ(z_i, w_i) with w = Mz + h;
/// the zero vector exactly at solutions.
pub fn fb_residual(lcp: &StandardLcp, z: &DVector<f64>) -> DVector<f64> {
    assert_eq!(z.len(), lcp.dim());
    let w = &lcp.m * z + &lcp.h;
    DVector::from_fn(z.len(), |i, _| fb_component(z[i], w[i]))
}

/// One element of the B-subdifferential of the FB map. At points with
/// z_i = w_i = 0 both partials are fixed to 1/√2 − 1 (the limit along the
/// diagonal direction), which keeps runs reproducible.
fn fb_jacobian(lcp: &StandardLcp, z: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let k = lcp.dim();
    let mut j = DMatrix::zeros(k, k);
    let tie = std::f64::consts::FRAC_1_SQRT_2 - 1.0;
    for i in 0..k {
        let r = z[i].hypot(w[i]);
        let (da, db) = if r <= 1e-14 {
            (tie, tie)
        } else {
            (z[i] / r - 1.0, w[i] / r - 1.0)
        };
        for col in 0..k {
            j[(i, col)] = db * lcp.m[(i, col)];
        }
        j[(i, i)] += da;
    }
    j
}

/// Damped Gauss–Newton (Levenberg–Marquardt) minimization of ½‖φ_FB‖².
/// Steps solve (JᵀJ + σI)d = −Jᵀφ; σ shrinks on accepted steps (floored at
/// `lm_sigma_min`) and grows on rejections. Acceptance uses the gain ratio
/// of actual versus model decrease with threshold 1e−4.
pub fn solve_lcp_lm(lcp: &StandardLcp, opts: &LcpSolveOptions) -> Result<LcpSolution, LcpError> {
    let k = lcp.dim();
    if k == 0 {
        return Ok(LcpSolution { z: DVector::zeros(0), iterations: 0, residual: 0.0 });
    }
    if lcp.h.iter().all(|&t| t == 0.0) {
        return Ok(LcpSolution { z: DVector::zeros(k), iterations: 0, residual: 0.0 });
    }
    let mut z = DVector::from_element(k, 1.0);
    let mut sigma = (opts.lm_sigma_min * opts.lm_sigma_max).sqrt();
    let mut fb = fb_residual(lcp, &z);
    let mut fb_norm2 = fb.norm_squared();
    for it in 0..opts.max_iters {
        let res = lcp_residual(lcp, &z);
        if res <= opts.tol {
            return Ok(LcpSolution { z, iterations: it, residual: res });
        }
        let w = &lcp.m * &z + &lcp.h;
        let j = fb_jacobian(lcp, &z, &w);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &fb;
        let sigma_ceiling = 1e12 * jtj.diagonal().amax().max(1.0);
        // Retry the step with stronger damping until the gain ratio accepts.
        loop {
            let mut a = jtj.clone();
            for i in 0..k {
                a[(i, i)] += sigma;
            }
            let d = match a.cholesky() {
                Some(chol) => chol.solve(&(-&g)),
                None => {
                    sigma *= opts.lm_scale;
                    if sigma > sigma_ceiling {
                        return Err(LcpError::SingularSystem);
                    }
                    continue;
                }
            };
            let z_trial = &z + &d;
            let fb_trial = fb_residual(lcp, &z_trial);
            let trial_norm2 = fb_trial.norm_squared();
            let model = &fb + &j * &d;
            let predicted = fb_norm2 - model.norm_squared();
            let actual = fb_norm2 - trial_norm2;
            if predicted > 0.0 && actual / predicted >= 1e-4 {
                z = z_trial;
                fb = fb_trial;
                fb_norm2 = trial_norm2;
                sigma = (sigma / opts.lm_scale).max(opts.lm_sigma_min);
                break;
            }
            sigma *= opts.lm_scale;
            if sigma > sigma_ceiling {
                return Err(LcpError::NonConvergence { final_residual: lcp_residual(lcp, &z) });
            }
        }
    }
    Err(LcpError::NonConvergence { final_residual: lcp_residual(lcp, &z) })
}

/// Infeasible-start primal-dual path following on z ≥ 0, w = Mz + h ≥ 0,
/// zᵀw → 0. One centered Newton step per iteration (centering σ =
/// `ipm_centering`), fraction-to-boundary stepping, starting from
/// z = w = 𝟙. Intended for positive semidefinite M; may fail otherwise.
pub fn solve_lcp_ipm(lcp: &StandardLcp, opts: &LcpSolveOptions) -> Result<LcpSolution, LcpError> {
    let k = lcp.dim();
    if k == 0 {
        return Ok(LcpSolution { z: DVector::zeros(0), iterations: 0, residual: 0.0 });
    }
    if lcp.h.iter().all(|&t| t == 0.0) {
        return Ok(LcpSolution { z: DVector::zeros(k), iterations: 0, residual: 0.0 });
    }
    let mut z = DVector::from_element(k, 1.0);
    let mut w = DVector::from_element(k, 1.0);
    for it in 0..opts.max_iters {
        let res = lcp_residual(lcp, &z);
        if res <= opts.tol {
            return Ok(LcpSolution { z, iterations: it, residual: res });
        }
        if z.amax() > 1e12 {
            return Err(LcpError::NonConvergence { final_residual: res });
        }
        let mu = z.dot(&w) / k as f64;
        let sigma_mu = opts.ipm_centering * mu;
        // Residual of the linear relation the iterate should satisfy.
        let r = &w - (&lcp.m * &z + &lcp.h);
        // (M + Z⁻¹W) Δz = σμ Z⁻¹𝟙 − w + r,  Δw = MΔz − r.
        let mut a = lcp.m.clone();
        let mut rhs = DVector::zeros(k);
        for i in 0..k {
            a[(i, i)] += w[i] / z[i];
            rhs[i] = sigma_mu / z[i] - w[i] + r[i];
        }
        let norm_a = a.amax();
        let dz = match a.lu().solve(&rhs) {
            Some(d) => d,
            None => {
                return Err(LcpError::IllConditioned {
                    condition_estimate: if norm_a > 0.0 { f64::INFINITY } else { 0.0 },
                })
            }
        };
        let dw = &lcp.m * &dz - &r;
        let mut theta: f64 = 1.0;
        for i in 0..k {
            if dz[i] < 0.0 {
                theta = theta.min(-opts.ipm_step_fraction * z[i] / dz[i]);
            }
            if dw[i] < 0.0 {
                theta = theta.min(-opts.ipm_step_fraction * w[i] / dw[i]);
            }
        }
        z += theta * &dz;
        w += theta * &dw;
        if it + 1 == opts.max_iters {
            let res = lcp_residual(lcp, &z);
            if res <= opts.tol {
                return Ok(LcpSolution { z, iterations: it + 1, residual: res });
            }
        }
    }
    Err(LcpError::NonConvergence { final_residual: lcp_residual(lcp, &z) })
}

/// Enumeration limit shared by the brute-force oracle and the PSD
/// solvability certificate.
pub const ENUMERATION_LIMIT: usize = 12;

/// Exhaustive complementarity-pattern enumeration. For every basis set B the
/// system M_BB z_B = −h_B is solved; candidates need z_B ≥ −1e−10 and the
/// complementary slacks ≥ −1e−10. Solutions are deduplicated at 1e−8.
/// Independent of the iterative solvers — used as their test oracle.
pub fn solve_lcp_bruteforce(lcp: &StandardLcp) -> Result<Vec<DVector<f64>>, LcpError> {
    let k = lcp.dim();
    if k > ENUMERATION_LIMIT {
        return Err(LcpError::DimensionTooLarge { dim: k, max: ENUMERATION_LIMIT });
    }
    let mut solutions: Vec<DVector<f64>> = Vec::new();
    let scale = lcp.m.amax().max(lcp.h.amax()).max(1.0);
    for mask in 0u32..(1u32 << k) {
        let basis: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let nb = basis.len();
        let mut z = DVector::zeros(k);
        if nb > 0 {
            let mut mbb = DMatrix::zeros(nb, nb);
            let mut hb = DVector::zeros(nb);
            for (r, &i) in basis.iter().enumerate() {
                hb[r] = -lcp.h[i];
                for (c, &jj) in basis.iter().enumerate() {
                    mbb[(r, c)] = lcp.m[(i, jj)];
                }
            }
            let zb = match mbb.clone().lu().solve(&hb) {
                Some(sol) => sol,
                None => continue,
            };
            // Discard solves that are only formally successful.
            if ((&mbb * &zb) - &hb).amax() > 1e-8 * scale {
                continue;
            }
            if zb.iter().any(|&t| t < -1e-10) {
                continue;
            }
            for (r, &i) in basis.iter().enumerate() {
                z[i] = zb[r].max(0.0);
            }
        }
        let w = &lcp.m * &z + &lcp.h;
        let feasible = (0..k).all(|i| {
            if mask & (1 << i) != 0 {
                true
            } else {
                w[i] >= -1e-10
            }
        });
        if !feasible {
            continue;
        }
        if !solutions.iter().any(|s| (s - &z).amax() <= 1e-8) {
            solutions.push(z);
        }
    }
    Ok(solutions)
}

/// Outcome of the PSD solvability certificate.
#[derive(Debug, Clone, PartialEq)]
pub enum PsdSolvability {
    /// M is PSD and every u ≥ 0 with Mu ≥ 0, uᵀMu = 0 satisfies uᵀh ≥ 0;
    /// the LCP is guaranteed solvable.
    SolvableCertified,
    /// A certified ray u with uᵀh < 0; solvability is not guaranteed.
    ConditionViolated(DVector<f64>),
    /// The symmetrized matrix has a negative eigenvalue; the certificate
    /// does not apply.
    NotPsd,
}

/// Solvability certificate for LCPs with positive semidefinite M: checks the
/// implication u ≥ 0, Mu ≥ 0, uᵀMu = 0 ⇒ uᵀh ≥ 0. For PSD M the quadratic
/// condition is equivalent to (M+Mᵀ)u = 0, so the cone is polyhedral and its
/// extreme rays can be enumerated in null((M+Mᵀ)) coordinates.
pub fn check_psd_solvability(lcp: &StandardLcp) -> Result<PsdSolvability, LcpError> {
    let k = lcp.dim();
    if k > ENUMERATION_LIMIT {
        return Err(LcpError::DimensionTooLarge { dim: k, max: ENUMERATION_LIMIT });
    }
    if k == 0 {
        return Ok(PsdSolvability::SolvableCertified);
    }
    let sym = (&lcp.m + lcp.m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.min() < -1e-10 * scale {
        return Ok(PsdSolvability::NotPsd);
    }
    let basis = null_space(&sym);
    let d = basis.ncols();
    if d == 0 {
        return Ok(PsdSolvability::SolvableCertified);
    }
    // On null(M+Mᵀ), Mu reduces to the skew part applied to u.
    let skew = (&lcp.m - lcp.m.transpose()) * 0.5;
    let skew_n = &skew * &basis;
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for i in 0..k {
        rows.push(basis.row(i).transpose());
    }
    let zero_tol = 1e-13 * skew_n.amax().max(1.0);
    for i in 0..k {
        let row = skew_n.row(i).transpose();
        if row.amax() > zero_tol {
            rows.push(row);
        }
    }
    let b_red = DMatrix::from_rows(&rows.iter().map(|r| r.transpose()).collect::<Vec<_>>());
    // basis has orthonormal columns so the u ≥ 0 rows already make the
    // reduced cone pointed; enumeration applies directly.
    let viol_tol = 1e-9 * lcp.h.amax().max(1.0);
    for v in pointed_cone_rays(&b_red) {
        let u = &basis * &v;
        if u.dot(&lcp.h) < -viol_tol {
            return Ok(PsdSolvability::ConditionViolated(u));
        }
    }
    Ok(PsdSolvability::SolvableCertified)
}
