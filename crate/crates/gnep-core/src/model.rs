//! Problem representation: per-player oracles, joint primal-dual points,
//! and instrumented evaluation counters.
//!
//! A problem with N players has a strategy vector x ∈ R^n partitioned into
//! per-player blocks x^ν (ν = 0..N-1, block sizes `player_dims`), and for
//! each player a constraint vector g^ν(x) ≤ 0 of length `constraint_dims[ν]`.
//! All derivative information is supplied through callable oracles so that
//! built-in problems and file-loaded affine problems share one interface.

use std::cell::Cell;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Gradient of player ν's objective w.r.t. its own block: (ν, x) → R^{n_ν}.
pub type ObjectiveGradOracle = Arc<dyn Fn(usize, &DVector<f64>) -> DVector<f64> + Send + Sync>;
/// Constraint values of player ν: (ν, x) → R^{m_ν}.
pub type ConstraintOracle = Arc<dyn Fn(usize, &DVector<f64>) -> DVector<f64> + Send + Sync>;
/// Full constraint Jacobian of player ν: (ν, x) → R^{m_ν × n}.
pub type ConstraintJacobianOracle = Arc<dyn Fn(usize, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;
/// Row block of the Lagrangian-gradient Jacobian: (ν, λ^ν, x) → R^{n_ν × n},
/// i.e. the derivative of ∇_{x^ν} L^ν w.r.t. the full x.
pub type LagrangianHessianOracle =
    Arc<dyn Fn(usize, &DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// What is known about convexity of the players' subproblems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    /// Each player's objective/constraints are convex in its own block.
    PlayerConvex,
    /// Convex jointly in x (stronger).
    JointlyConvex,
    Unknown,
}

/// Evaluation counters in units of oracle *family sweeps*: one pass of the
/// objective-gradient family over all players is one `grad_evals` tick, one
/// pass of the constraint-Jacobian family is another, and one full assembly
/// of the Lagrangian-gradient Jacobian is one `hess_evals` tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EvalCounters {
    pub grad_evals: u64,
    pub hess_evals: u64,
}

/// A primal-dual iterate: x ∈ R^n, lambda ∈ R^m (multipliers stacked per
/// player in the same order as the constraint blocks).
#[derive(Debug, Clone, PartialEq)]
pub struct JointPoint {
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
}

impl JointPoint {
    pub fn new(x: DVector<f64>, lambda: DVector<f64>) -> Self {
        Self { x, lambda }
    }
}

/// Wire format for [`JointPoint`]: plain arrays, `{"x": [...], "lambda":
/// [...]}`, so point files can be written by hand.
#[derive(serde::Serialize, serde::Deserialize)]
struct JointPointRepr {
    x: Vec<f64>,
    lambda: Vec<f64>,
}

impl serde::Serialize for JointPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        JointPointRepr {
            x: self.x.iter().copied().collect(),
            lambda: self.lambda.iter().copied().collect(),
        }
        .serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for JointPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = JointPointRepr::deserialize(d)?;
        Ok(JointPoint { x: DVector::from_vec(repr.x), lambda: DVector::from_vec(repr.lambda) })
    }
}

/// Errors raised while evaluating problem oracles.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("player {player}: oracle `{oracle}` returned {got} entries/rows, expected {expected}")]
    DimensionMismatch {
        player: usize,
        oracle: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("player {player}: oracle `{oracle}` returned a non-finite value at x = {x:?}")]
    NonFinite {
        player: usize,
        oracle: &'static str,
        x: Vec<f64>,
    },
    #[error("point has {got} {what}, problem expects {expected}")]
    PointMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

/// First-order KKT data at a point: the stacked Lagrangian gradient F, the
/// stacked constraint values G, and the three Jacobian-level matrices used by
/// the linearized subproblem.
///
/// E is n×m block-diagonal with player blocks (𝒥_{x^ν} g^ν)ᵀ — the own-block
/// columns of the constraint Jacobians; JxG is the full m×n constraint
/// Jacobian; JxF is the n×n Jacobian of F in x.
#[derive(Debug, Clone)]
pub struct KktData {
    pub f: DVector<f64>,
    pub g: DVector<f64>,
    pub e: DMatrix<f64>,
    pub jxg: DMatrix<f64>,
    pub jxf: DMatrix<f64>,
}

/// A GNEP instance. Oracles must be pure: identical inputs produce identical
/// outputs. A handle carries its own counters and is meant to be used by one
/// solve at a time; clones share the oracles but can run concurrently.
#[derive(Clone)]
pub struct GnepProblem {
    pub name: String,
    pub player_dims: Vec<usize>,
    pub constraint_dims: Vec<usize>,
    pub objective_grad_oracle: ObjectiveGradOracle,
    pub constraint_oracle: ConstraintOracle,
    pub constraint_jacobian_oracle: ConstraintJacobianOracle,
    pub lagrangian_hessian_oracle: LagrangianHessianOracle,
    /// Variable indices i whose player owns a constraint row with full
    /// Jacobian −e_iᵀ (a lower bound on x_i). Enables the bound-eliminating
    /// standard-LCP reduction.
    pub nonneg_variable_indices: Vec<usize>,
    pub convexity_flag: Convexity,
    counters: Cell<EvalCounters>,
}

impl std::fmt::Debug for GnepProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GnepProblem")
            .field("name", &self.name)
            .field("player_dims", &self.player_dims)
            .field("constraint_dims", &self.constraint_dims)
            .field("nonneg_variable_indices", &self.nonneg_variable_indices)
            .field("convexity_flag", &self.convexity_flag)
            .finish_non_exhaustive()
    }
}

impl GnepProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        player_dims: Vec<usize>,
        constraint_dims: Vec<usize>,
        objective_grad_oracle: ObjectiveGradOracle,
        constraint_oracle: ConstraintOracle,
        constraint_jacobian_oracle: ConstraintJacobianOracle,
        lagrangian_hessian_oracle: LagrangianHessianOracle,
        nonneg_variable_indices: Vec<usize>,
        convexity_flag: Convexity,
    ) -> Self {
        assert_eq!(
            player_dims.len(),
            constraint_dims.len(),
            "player_dims and constraint_dims must have one entry per player"
        );
        assert!(player_dims.iter().all(|&d| d > 0), "player dims must be positive");
        Self {
            name: name.into(),
            player_dims,
            constraint_dims,
            objective_grad_oracle,
            constraint_oracle,
            constraint_jacobian_oracle,
            lagrangian_hessian_oracle,
            nonneg_variable_indices,
            convexity_flag,
            counters: Cell::new(EvalCounters::default()),
        }
    }

    pub fn num_players(&self) -> usize {
        self.player_dims.len()
    }

    /// Total primal dimension n = Σ n_ν.
    pub fn n(&self) -> usize {
        self.player_dims.iter().sum()
    }

    /// Total multiplier dimension m = Σ m_ν.
    pub fn m(&self) -> usize {
        self.constraint_dims.iter().sum()
    }

    /// Index range of player ν's variables inside x.
    pub fn var_range(&self, player: usize) -> Range<usize> {
        let start: usize = self.player_dims[..player].iter().sum();
        start..start + self.player_dims[player]
    }

    /// Index range of player ν's constraint rows inside G / lambda.
    pub fn con_range(&self, player: usize) -> Range<usize> {
        let start: usize = self.constraint_dims[..player].iter().sum();
        start..start + self.constraint_dims[player]
    }

    pub fn counters(&self) -> EvalCounters {
        self.counters.get()
    }

    pub fn reset_counters(&self) {
        self.counters.set(EvalCounters::default());
    }

    fn bump_grad(&self, by: u64) {
        let mut c = self.counters.get();
        c.grad_evals += by;
        self.counters.set(c);
    }

    fn bump_hess(&self) {
        let mut c = self.counters.get();
        c.hess_evals += 1;
        self.counters.set(c);
    }

    pub(crate) fn check_point(&self, point: &JointPoint) -> Result<(), EvalError> {
        if point.x.len() != self.n() {
            return Err(EvalError::PointMismatch {
                what: "variables",
                expected: self.n(),
                got: point.x.len(),
            });
        }
        if point.lambda.len() != self.m() {
            return Err(EvalError::PointMismatch {
                what: "multipliers",
                expected: self.m(),
                got: point.lambda.len(),
            });
        }
        Ok(())
    }

    fn grad_at(&self, player: usize, x: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        let v = (self.objective_grad_oracle)(player, x);
        if v.len() != self.player_dims[player] {
            return Err(EvalError::DimensionMismatch {
                player,
                oracle: "objective_grad",
                expected: self.player_dims[player],
                got: v.len(),
            });
        }
        if !v.iter().all(|t| t.is_finite()) {
            return Err(EvalError::NonFinite {
                player,
                oracle: "objective_grad",
                x: x.iter().copied().collect(),
            });
        }
        Ok(v)
    }

    fn cons_at(&self, player: usize, x: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        let v = (self.constraint_oracle)(player, x);
        if v.len() != self.constraint_dims[player] {
            return Err(EvalError::DimensionMismatch {
                player,
                oracle: "constraint",
                expected: self.constraint_dims[player],
                got: v.len(),
            });
        }
        if !v.iter().all(|t| t.is_finite()) {
            return Err(EvalError::NonFinite {
                player,
                oracle: "constraint",
                x: x.iter().copied().collect(),
            });
        }
        Ok(v)
    }

    fn cons_jac_at(&self, player: usize, x: &DVector<f64>) -> Result<DMatrix<f64>, EvalError> {
        let j = (self.constraint_jacobian_oracle)(player, x);
        if j.nrows() != self.constraint_dims[player] || j.ncols() != self.n() {
            return Err(EvalError::DimensionMismatch {
                player,
                oracle: "constraint_jacobian",
                expected: self.constraint_dims[player],
                got: j.nrows(),
            });
        }
        if !j.iter().all(|t| t.is_finite()) {
            return Err(EvalError::NonFinite {
                player,
                oracle: "constraint_jacobian",
                x: x.iter().copied().collect(),
            });
        }
        Ok(j)
    }

    fn hess_at(
        &self,
        player: usize,
        lambda_nu: &DVector<f64>,
        x: &DVector<f64>,
    ) -> Result<DMatrix<f64>, EvalError> {
        let h = (self.lagrangian_hessian_oracle)(player, lambda_nu, x);
        if h.nrows() != self.player_dims[player] || h.ncols() != self.n() {
            return Err(EvalError::DimensionMismatch {
                player,
                oracle: "lagrangian_hessian",
                expected: self.player_dims[player],
                got: h.nrows(),
            });
        }
        if !h.iter().all(|t| t.is_finite()) {
            return Err(EvalError::NonFinite {
                player,
                oracle: "lagrangian_hessian",
                x: x.iter().copied().collect(),
            });
        }
        Ok(h)
    }

    /// Values-level evaluation: F(x,λ) and G(x) without any second-order
    /// data. Costs one objective-gradient sweep plus one constraint-Jacobian
    /// sweep (+2 grad_evals); the Jacobians are needed for the (𝒥g)ᵀλ term
    /// of F even though they are not returned.
    pub fn eval_values(
        &self,
        point: &JointPoint,
    ) -> Result<(DVector<f64>, DVector<f64>), EvalError> {
        self.check_point(point)?;
        let (f, g) = self.values_uncounted(point)?;
        self.bump_grad(2);
        Ok((f, g))
    }

    /// Same as [`eval_values`](Self::eval_values) but without touching the
    /// counters; for derivative checking and other diagnostics plumbing.
    pub(crate) fn values_uncounted(
        &self,
        point: &JointPoint,
    ) -> Result<(DVector<f64>, DVector<f64>), EvalError> {
        let n = self.n();
        let m = self.m();
        let mut f = DVector::zeros(n);
        let mut g = DVector::zeros(m);
        for nu in 0..self.num_players() {
            let vr = self.var_range(nu);
            let cr = self.con_range(nu);
            let grad = self.grad_at(nu, &point.x)?;
            f.rows_mut(vr.start, vr.len()).copy_from(&grad);
            if cr.len() > 0 {
                let gv = self.cons_at(nu, &point.x)?;
                g.rows_mut(cr.start, cr.len()).copy_from(&gv);
                let jac = self.cons_jac_at(nu, &point.x)?;
                // F^ν += (𝒥_{x^ν} g^ν)ᵀ λ^ν — only the own-block columns enter.
                let own = jac.columns(vr.start, vr.len());
                let lam_nu = point.lambda.rows(cr.start, cr.len());
                let contrib = own.transpose() * lam_nu;
                let mut fv = f.rows_mut(vr.start, vr.len());
                fv += contrib;
            }
        }
        Ok((f, g))
    }

    /// Full first-order KKT data assembly (+2 grad_evals, +1 hess_evals).
    pub fn eval_kkt_data(&self, point: &JointPoint) -> Result<KktData, EvalError> {
        self.check_point(point)?;
        let n = self.n();
        let m = self.m();
        let mut f = DVector::zeros(n);
        let mut g = DVector::zeros(m);
        let mut e = DMatrix::zeros(n, m);
        let mut jxg = DMatrix::zeros(m, n);
        let mut jxf = DMatrix::zeros(n, n);
        for nu in 0..self.num_players() {
            let vr = self.var_range(nu);
            let cr = self.con_range(nu);
            let grad = self.grad_at(nu, &point.x)?;
            f.rows_mut(vr.start, vr.len()).copy_from(&grad);
            let lam_nu = DVector::from(point.lambda.rows(cr.start, cr.len()));
            if cr.len() > 0 {
                let gv = self.cons_at(nu, &point.x)?;
                g.rows_mut(cr.start, cr.len()).copy_from(&gv);
                let jac = self.cons_jac_at(nu, &point.x)?;
                jxg.view_mut((cr.start, 0), (cr.len(), n)).copy_from(&jac);
                let own = jac.columns(vr.start, vr.len()).transpose();
                e.view_mut((vr.start, cr.start), (vr.len(), cr.len()))
                    .copy_from(&own);
                let contrib = &own * &lam_nu;
                let mut fv = f.rows_mut(vr.start, vr.len());
                fv += contrib;
            }
            let h = self.hess_at(nu, &lam_nu, &point.x)?;
            jxf.view_mut((vr.start, 0), (vr.len(), n)).copy_from(&h);
        }
        self.bump_grad(2);
        self.bump_hess();
        Ok(KktData { f, g, e, jxg, jxf })
    }
}

/// Per-player maximum relative errors from central finite-difference checks.
///
/// `constraint_jacobian_err[ν]` compares the constraint Jacobian oracle
/// against differences of constraint values; `lagrangian_hessian_err[ν]`
/// compares the Hessian row block against differences of F (which embeds the
/// objective gradient, so that oracle is validated jointly — with λ = 0 it is
/// isolated). Non-finite evaluations are recorded, not thrown.
#[derive(Debug, Clone)]
pub struct DerivativeReport {
    pub constraint_jacobian_err: Vec<f64>,
    pub lagrangian_hessian_err: Vec<f64>,
    pub nonfinite_evals: usize,
    pub max_error: f64,
}

/// Central finite-difference consistency check of the derivative oracles at
/// `point` with differencing step `step` (> 0). Does not touch counters.
pub fn check_derivatives(
    problem: &GnepProblem,
    point: &JointPoint,
    step: f64,
) -> Result<DerivativeReport, EvalError> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let n = problem.n();
    let num_players = problem.num_players();
    let mut nonfinite = 0usize;

    // Analytic data at the base point (uncounted).
    let mut jac_err = vec![0.0f64; num_players];
    let mut hess_err = vec![0.0f64; num_players];

    // Constraint Jacobians vs FD of constraint values.
    for nu in 0..num_players {
        if problem.constraint_dims[nu] == 0 {
            continue;
        }
        let jac = problem.cons_jac_at(nu, &point.x)?;
        let scale = jac.amax().max(1.0);
        for j in 0..n {
            let mut xp = point.x.clone();
            let mut xm = point.x.clone();
            xp[j] += step;
            xm[j] -= step;
            let gp = (problem.constraint_oracle)(nu, &xp);
            let gm = (problem.constraint_oracle)(nu, &xm);
            if !(gp.iter().all(|t| t.is_finite()) && gm.iter().all(|t| t.is_finite())) {
                nonfinite += 1;
                continue;
            }
            let fd = (gp - gm) / (2.0 * step);
            for i in 0..problem.constraint_dims[nu] {
                let err = (fd[i] - jac[(i, j)]).abs() / scale;
                jac_err[nu] = jac_err[nu].max(err);
            }
        }
    }

    // Lagrangian-Hessian row blocks vs FD of F.
    let jxf_fd = {
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut pp = point.clone();
            let mut pm = point.clone();
            pp.x[j] += step;
            pm.x[j] -= step;
            match (problem.values_uncounted(&pp), problem.values_uncounted(&pm)) {
                (Ok((fp, _)), Ok((fm, _))) => cols.push((fp - fm) / (2.0 * step)),
                _ => {
                    nonfinite += 1;
                    cols.push(DVector::from_element(n, f64::NAN));
                }
            }
        }
        DMatrix::from_columns(&cols)
    };
    for nu in 0..num_players {
        let vr = problem.var_range(nu);
        let cr = problem.con_range(nu);
        let lam_nu = DVector::from(point.lambda.rows(cr.start, cr.len()));
        let h = problem.hess_at(nu, &lam_nu, &point.x)?;
        let scale = h.amax().max(1.0);
        for i in 0..vr.len() {
            for j in 0..n {
                let fd = jxf_fd[(vr.start + i, j)];
                if !fd.is_finite() {
                    continue;
                }
                let err = (fd - h[(i, j)]).abs() / scale;
                hess_err[nu] = hess_err[nu].max(err);
            }
        }
    }

    let max_error = jac_err
        .iter()
        .chain(hess_err.iter())
        .copied()
        .fold(0.0f64, f64::max);
    Ok(DerivativeReport {
        constraint_jacobian_err: jac_err,
        lagrangian_hessian_err: hess_err,
        nonfinite_evals: nonfinite,
        max_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_internet_switching, make_two_player_quadratic, switching_bench_params};
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_player_quadratic_kkt_data() {
        let p = make_two_player_quadratic();
        let pt = JointPoint::new(DVector::from_vec(vec![1.0, -1.5]), DVector::zeros(0));
        let data = p.eval_kkt_data(&pt).unwrap();
        assert_abs_diff_eq!(data.f[0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(data.f[1], 0.5, epsilon = 1e-15);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 1.0]);
        assert_eq!(data.jxf, expected);
        assert_eq!(data.g.len(), 0);
        assert_eq!(data.e.shape(), (2, 0));
        assert_eq!(data.jxg.shape(), (0, 2));
    }

    #[test]
    fn two_player_quadratic_equilibrium_is_stationary() {
        let p = make_two_player_quadratic();
        let pt = JointPoint::new(DVector::zeros(2), DVector::zeros(0));
        let data = p.eval_kkt_data(&pt).unwrap();
        assert_eq!(data.f, DVector::zeros(2));
    }

    #[test]
    fn point_json_round_trip() {
        let p = JointPoint::new(DVector::from_vec(vec![1.0, -2.5]), DVector::from_vec(vec![0.5]));
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"x":[1.0,-2.5],"lambda":[0.5]}"#);
        let back: JointPoint = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    proptest::proptest! {
        #[test]
        fn point_json_round_trips_exactly(
            x in proptest::collection::vec(-1e12..1e12f64, 0..6),
            lam in proptest::collection::vec(0.0..1e12f64, 0..6),
        ) {
            let p = JointPoint::new(DVector::from_vec(x), DVector::from_vec(lam));
            let back: JointPoint = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
            proptest::prop_assert_eq!(back, p);
        }
    }

    #[test]
    fn switching_symmetric_point_is_stationary() {
        // Two players sharing buffer 1 at x = (0.25, 0.25): the aggregate is
        // 0.5, the gradient 1/B − (S−x)/S² vanishes, own Hessian entries are
        // 2(S−x)/S³ = 4 and cross entries (S−2x)/S³ = 0.
        let mut params = switching_bench_params();
        params.n_players = 2;
        params.informed = vec![false, false];
        params.buffer = 1.0;
        params.lower = vec![0.01, 0.01];
        params.upper = vec![None, None];
        let p = make_internet_switching(&params).unwrap();
        let m = p.m();
        let pt = JointPoint::new(DVector::from_element(2, 0.25), DVector::zeros(m));
        let data = p.eval_kkt_data(&pt).unwrap();
        assert_abs_diff_eq!(data.f[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(data.f[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(data.jxf[(0, 0)], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(data.jxf[(1, 1)], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(data.jxf[(0, 1)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(data.jxf[(1, 0)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn counters_tick_two_grads_one_hess_per_assembly() {
        let p = make_two_player_quadratic();
        let pt = JointPoint::new(DVector::from_vec(vec![1.0, -1.5]), DVector::zeros(0));
        p.reset_counters();
        p.eval_kkt_data(&pt).unwrap();
        assert_eq!(p.counters(), EvalCounters { grad_evals: 2, hess_evals: 1 });
        p.eval_values(&pt).unwrap();
        assert_eq!(p.counters(), EvalCounters { grad_evals: 4, hess_evals: 1 });
        p.reset_counters();
        assert_eq!(p.counters(), EvalCounters::default());
    }

    #[test]
    fn e_matches_own_block_of_jxg_transposed() {
        let params = switching_bench_params();
        let p = make_internet_switching(&params).unwrap();
        let pt = JointPoint::new(
            DVector::from_element(p.n(), 0.2),
            DVector::from_element(p.m(), 0.3),
        );
        let data = p.eval_kkt_data(&pt).unwrap();
        let jxg_t = data.jxg.transpose();
        for nu in 0..p.num_players() {
            let vr = p.var_range(nu);
            let cr = p.con_range(nu);
            let e_block = data.e.view((vr.start, cr.start), (vr.len(), cr.len()));
            let t_block = jxg_t.view((vr.start, cr.start), (vr.len(), cr.len()));
            assert_eq!(e_block, t_block);
        }
    }

    #[test]
    fn derivative_check_catches_corrupted_hessian() {
        let good = make_two_player_quadratic();
        let pt = JointPoint::new(DVector::from_vec(vec![0.7, -0.3]), DVector::zeros(0));
        let rep = check_derivatives(&good, &pt, 1e-6).unwrap();
        assert!(rep.max_error <= 1e-6, "exact polynomial oracles, got {}", rep.max_error);

        let mut bad = good.clone();
        bad.lagrangian_hessian_oracle = Arc::new(|nu, _lam, _x| {
            let mut h = DMatrix::zeros(1, 2);
            h[(0, nu)] = 5.0; // wrong diagonal
            h[(0, 1 - nu)] = if nu == 0 { 1.0 } else { 2.0 };
            h
        });
        let rep = check_derivatives(&bad, &pt, 1e-6).unwrap();
        assert!(rep.max_error >= 1e-2, "corruption must be flagged, got {}", rep.max_error);
    }

    #[test]
    fn nonfinite_oracle_is_an_error_with_location() {
        let p = make_two_player_quadratic();
        let mut bad = p.clone();
        bad.objective_grad_oracle = Arc::new(|_nu, x| DVector::from_element(1, 1.0 / (x[0] - x[0])));
        let pt = JointPoint::new(DVector::from_vec(vec![1.0, 2.0]), DVector::zeros(0));
        match bad.eval_kkt_data(&pt) {
            Err(EvalError::NonFinite { player: 0, .. }) => {}
            other => panic!("expected NonFinite for player 0, got {other:?}"),
        }
    }
}
