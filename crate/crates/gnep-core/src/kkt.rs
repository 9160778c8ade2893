//! Merit function, its exact directional derivative, and the KKT residual
//! used as the stopping rule.
//!
//! The merit at (x, λ) with weight ρ > 0 is
//!
//! ```text
//! Φ_ρ = (−λᵀG(x))₊  +  (ρ/2)·‖F(x,λ)‖²  +  Σ_i (g_i(x))₊
//! ```
//!
//! Together with λ ≥ 0, Φ_ρ = 0 holds exactly at KKT pairs. The directional
//! derivative is computed from the piecewise rule for t ↦ (s(t))₊ rather
//! than by finite differences, because the line-search theory needs the
//! exact one-sided value.

use nalgebra::DVector;

use crate::model::{EvalError, GnepProblem, JointPoint};

/// Absolute tolerance for detecting the tie case s = 0 in the plus-part
/// directional rule; exact zeros only occur at constructed points, and a
/// small band prevents branch flapping from roundoff.
const TIE_TOL: f64 = 1e-12;

/// Itemized merit value; `total` is always the sum of the three parts and
/// every part is nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeritValue {
    pub total: f64,
    pub complementarity_part: f64,
    pub stationarity_part: f64,
    pub infeasibility_part: f64,
}

/// Assemble a [`MeritValue`] from already-evaluated F, G. Used internally by
/// the drivers to avoid re-invoking oracles the caller has already paid for.
pub(crate) fn merit_from_values(
    f: &DVector<f64>,
    g: &DVector<f64>,
    lambda: &DVector<f64>,
    rho: f64,
) -> MeritValue {
    let complementarity_part = (-lambda.dot(g)).max(0.0);
    let stationarity_part = 0.5 * rho * f.norm_squared();
    let infeasibility_part = g.iter().map(|gi| gi.max(0.0)).sum::<f64>();
    MeritValue {
        total: complementarity_part + stationarity_part + infeasibility_part,
        complementarity_part,
        stationarity_part,
        infeasibility_part,
    }
}

/// Merit function Φ_ρ at `point`. Costs one values-level evaluation
/// (+2 grad_evals).
pub fn merit(problem: &GnepProblem, point: &JointPoint, rho: f64) -> Result<MeritValue, EvalError> {
    assert!(rho > 0.0, "merit weight rho must be positive");
    let (f, g) = problem.eval_values(point)?;
    Ok(merit_from_values(&f, &g, &point.lambda, rho))
}

/// Contribution of one plus-part term t ↦ (s + t·s')₊ at t = 0⁺:
/// s' if s > 0, (s')₊ at the tie s ≈ 0, and 0 if s < 0.
fn plus_part_derivative(s: f64, s_prime: f64) -> f64 {
    if s > TIE_TOL {
        s_prime
    } else if s >= -TIE_TOL {
        s_prime.max(0.0)
    } else {
        0.0
    }
}

/// Exact one-sided directional derivative Φ'_ρ((x,λ); (p,q)).
///
/// Needs the full first-order KKT data for the inner linearizations
/// (+2 grad_evals, +1 hess_evals).
pub fn merit_directional(
    problem: &GnepProblem,
    point: &JointPoint,
    rho: f64,
    p: &DVector<f64>,
    q: &DVector<f64>,
) -> Result<f64, EvalError> {
    assert!(rho > 0.0, "merit weight rho must be positive");
    let data = problem.eval_kkt_data(point)?;
    let jxg_p = &data.jxg * p;

    // (−λᵀG)₊: inner value −λᵀG, inner derivative −qᵀG − λᵀ(JxG p).
    let s = -point.lambda.dot(&data.g);
    let s_prime = -q.dot(&data.g) - point.lambda.dot(&jxg_p);
    let mut total = plus_part_derivative(s, s_prime);

    // Smooth part: ρ Fᵀ (JxF p + E q).
    let df = &data.jxf * p + &data.e * q;
    total += rho * data.f.dot(&df);

    // Σ (g_i)₊ with inner derivative (JxG p)_i.
    for i in 0..data.g.len() {
        total += plus_part_derivative(data.g[i], jxg_p[i]);
    }
    Ok(total)
}

pub(crate) fn kkt_residual_from_values(
    f: &DVector<f64>,
    g: &DVector<f64>,
    lambda: &DVector<f64>,
) -> f64 {
    let f_norm = if f.len() > 0 { f.amax() } else { 0.0 };
    let mut viol: f64 = 0.0;
    let mut comp: f64 = 0.0;
    for i in 0..g.len() {
        viol = viol.max(g[i].max(0.0));
        comp = comp.max((lambda[i] * g[i]).abs());
    }
    f_norm.max(viol).max(comp)
}

/// Stopping-rule residual max{‖F‖_∞, ‖(G)₊‖_∞, max_i |λ_i g_i|}
/// (+2 grad_evals).
pub fn kkt_residual(problem: &GnepProblem, point: &JointPoint) -> Result<f64, EvalError> {
    let (f, g) = problem.eval_values(point)?;
    Ok(kkt_residual_from_values(&f, &g, &point.lambda))
}
