//! Built-in problem instances, a parametrized bandwidth-sharing game with a
//! closed-form equilibrium, and a JSON format for affine problems (quadratic
//! objectives, affine constraints) with a seeded random generator.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Convexity, GnepProblem, JointPoint};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("equilibrium formula precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

/// Two unconstrained players with quadratic objectives
/// θ¹ = ½(x¹)² + x¹x² and θ² = ½(x²)² + 2x¹x². The stacked stationarity map
/// is affine with Jacobian [[1,1],[2,1]]; the unique equilibrium is the
/// origin.
pub fn make_two_player_quadratic() -> GnepProblem {
    GnepProblem::new(
        "two-player-quadratic",
        vec![1, 1],
        vec![0, 0],
        Arc::new(|nu, x: &DVector<f64>| {
            let v = if nu == 0 { x[0] + x[1] } else { 2.0 * x[0] + x[1] };
            DVector::from_element(1, v)
        }),
        Arc::new(|_, _x: &DVector<f64>| DVector::zeros(0)),
        Arc::new(|_, _x: &DVector<f64>| DMatrix::zeros(0, 2)),
        Arc::new(|nu, _l: &DVector<f64>, _x: &DVector<f64>| {
            if nu == 0 {
                DMatrix::from_row_slice(1, 2, &[1.0, 1.0])
            } else {
                DMatrix::from_row_slice(1, 2, &[2.0, 1.0])
            }
        }),
        vec![],
        Convexity::PlayerConvex,
    )
}

/// Four single-variable players:
///   θ¹ = (1/12)(x¹)⁴ + x¹x²   s.t. −x¹ ≤ 0
///   θ² = ½(x¹ + x² − x³)²
///   θ³ = x³x⁴                 s.t. −x³ ≤ 0
///   θ⁴ = ½(x³ + x⁴ − 1)²
/// The point x = (0,0,0,1), λ = (0,1) satisfies the KKT conditions with one
/// degenerate constraint (player 1's bound: active with zero multiplier);
/// useful as a fixture where the stability notions genuinely differ.
pub fn make_four_player_semistable() -> GnepProblem {
    GnepProblem::new(
        "four-player-semistable",
        vec![1, 1, 1, 1],
        vec![1, 0, 1, 0],
        Arc::new(|nu, x: &DVector<f64>| {
            let v = match nu {
                0 => x[0].powi(3) / 3.0 + x[1],
                1 => x[0] + x[1] - x[2],
                2 => x[3],
                _ => x[2] + x[3] - 1.0,
            };
            DVector::from_element(1, v)
        }),
        Arc::new(|nu, x: &DVector<f64>| match nu {
            0 => DVector::from_element(1, -x[0]),
            2 => DVector::from_element(1, -x[2]),
            _ => DVector::zeros(0),
        }),
        Arc::new(|nu, _x: &DVector<f64>| match nu {
            0 => DMatrix::from_row_slice(1, 4, &[-1.0, 0.0, 0.0, 0.0]),
            2 => DMatrix::from_row_slice(1, 4, &[0.0, 0.0, -1.0, 0.0]),
            _ => DMatrix::zeros(0, 4),
        }),
        Arc::new(|nu, _l: &DVector<f64>, x: &DVector<f64>| match nu {
            0 => DMatrix::from_row_slice(1, 4, &[x[0] * x[0], 1.0, 0.0, 0.0]),
            1 => DMatrix::from_row_slice(1, 4, &[1.0, 1.0, -1.0, 0.0]),
            2 => DMatrix::from_row_slice(1, 4, &[0.0, 0.0, 0.0, 1.0]),
            _ => DMatrix::from_row_slice(1, 4, &[0.0, 0.0, 1.0, 1.0]),
        }),
        vec![0, 2],
        Convexity::PlayerConvex,
    )
}

/// The KKT pair (x, λ) = ((0,0,0,1), (0,1)) of the four-player fixture.
pub fn four_player_solution() -> JointPoint {
    JointPoint::new(
        DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]),
        DVector::from_vec(vec![0.0, 1.0]),
    )
}

/// Bandwidth-sharing game on one link of capacity `buffer`: player ν sends
/// x_ν and minimizes x_ν/B − x_ν/S with S = Σ x (equivalently maximizes its
/// throughput share net of congestion cost). Every player has a lower bound
/// l_ν ≤ x_ν, optionally an upper bound x_ν ≤ L_ν, and *informed* players
/// additionally impose the shared capacity constraint S ≤ B on themselves —
/// giving each informed player its own copy of that row, which is what makes
/// this a generalized (shared-constraint) game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternetSwitchingParams {
    pub n_players: usize,
    /// Mask: which players impose the shared capacity constraint.
    pub informed: Vec<bool>,
    pub buffer: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

/// The 10-player benchmark configuration: player 0 uninformed with bounds
/// [0.3, 0.5], players 1..9 informed with lower bound 0.01, buffer 1.
pub fn switching_bench_params() -> InternetSwitchingParams {
    let n = 10;
    let mut informed = vec![true; n];
    informed[0] = false;
    let mut lower = vec![0.01; n];
    lower[0] = 0.3;
    let mut upper: Vec<Option<f64>> = vec![None; n];
    upper[0] = Some(0.5);
    InternetSwitchingParams { n_players: n, informed, buffer: 1.0, lower, upper }
}

fn validate_switching(params: &InternetSwitchingParams) -> Result<(), ProblemError> {
    let n = params.n_players;
    if n == 0 {
        return Err(ProblemError::InvalidParams("n_players must be at least 1".into()));
    }
    for (label, len) in [
        ("informed", params.informed.len()),
        ("lower", params.lower.len()),
        ("upper", params.upper.len()),
    ] {
        if len != n {
            return Err(ProblemError::InvalidParams(format!(
                "{label} has {len} entries, expected n_players = {n}"
            )));
        }
    }
    if !(params.buffer.is_finite() && params.buffer > 0.0) {
        return Err(ProblemError::InvalidParams(format!(
            "buffer must be a positive number, got {}",
            params.buffer
        )));
    }
    for nu in 0..n {
        let l = params.lower[nu];
        if !(l.is_finite() && l >= 0.0) {
            return Err(ProblemError::InvalidParams(format!(
                "lower[{nu}] must be finite and nonnegative, got {l}"
            )));
        }
        if let Some(u) = params.upper[nu] {
            if !(u.is_finite() && u > l) {
                return Err(ProblemError::InvalidParams(format!(
                    "upper[{nu}] must be finite and exceed lower[{nu}] = {l}, got {u}"
                )));
            }
        }
    }
    let total_lower: f64 = params.lower.iter().sum();
    if total_lower > params.buffer {
        return Err(ProblemError::InvalidParams(format!(
            "infeasible: sum of lower bounds {total_lower} exceeds buffer {}",
            params.buffer
        )));
    }
    Ok(())
}

/// Constraint rows of player ν, in order: lower bound, upper bound (if any),
/// shared capacity (if informed).
fn switching_rows(params: &InternetSwitchingParams, nu: usize) -> usize {
    1 + params.upper[nu].is_some() as usize + params.informed[nu] as usize
}

pub fn make_internet_switching(
    params: &InternetSwitchingParams,
) -> Result<GnepProblem, ProblemError> {
    validate_switching(params)?;
    let n = params.n_players;
    let constraint_dims: Vec<usize> = (0..n).map(|nu| switching_rows(params, nu)).collect();
    let p_grad = Arc::new(params.clone());
    let p_cons = Arc::clone(&p_grad);
    let p_jac = Arc::clone(&p_grad);
    let p_hess = Arc::clone(&p_grad);
    Ok(GnepProblem::new(
        format!("switching{n}"),
        vec![1; n],
        constraint_dims,
        Arc::new(move |nu, x: &DVector<f64>| {
            let s: f64 = x.sum();
            let v = 1.0 / p_grad.buffer - (s - x[nu]) / (s * s);
            DVector::from_element(1, v)
        }),
        Arc::new(move |nu, x: &DVector<f64>| {
            let p = &p_cons;
            let mut g = Vec::with_capacity(switching_rows(p, nu));
            g.push(p.lower[nu] - x[nu]);
            if let Some(u) = p.upper[nu] {
                g.push(x[nu] - u);
            }
            if p.informed[nu] {
                g.push(x.sum() - p.buffer);
            }
            DVector::from_vec(g)
        }),
        Arc::new(move |nu, x: &DVector<f64>| {
            let p = &p_jac;
            let rows = switching_rows(p, nu);
            let mut j = DMatrix::zeros(rows, x.len());
            j[(0, nu)] = -1.0;
            let mut r = 1;
            if p.upper[nu].is_some() {
                j[(r, nu)] = 1.0;
                r += 1;
            }
            if p.informed[nu] {
                j.row_mut(r).fill(1.0);
            }
            j
        }),
        Arc::new(move |nu, _l: &DVector<f64>, x: &DVector<f64>| {
            let _ = &p_hess;
            let s: f64 = x.sum();
            let s3 = s * s * s;
            let mut h = DMatrix::zeros(1, x.len());
            for col in 0..x.len() {
                h[(0, col)] = if col == nu {
                    2.0 * (s - x[nu]) / s3
                } else {
                    (s - 2.0 * x[nu]) / s3
                };
            }
            h
        }),
        (0..n).collect(),
        Convexity::PlayerConvex,
    ))
}

/// Closed-form KKT pair for configurations where every uninformed player is
/// pinned at its lower bound and the informed players share one interior
/// value x̄. With a = Σ_uninformed l_ν, N₁ = #informed and B the buffer,
/// x̄ solves N₁²x̄² + (2aN₁ − BN₁ + B)x̄ + a² − Ba = 0 (larger root) and the
/// aggregate is s = a + N₁x̄. Every assumption is re-checked and a violated
/// one is reported by name.
pub fn internet_switching_solution(
    params: &InternetSwitchingParams,
) -> Result<JointPoint, ProblemError> {
    validate_switching(params)?;
    let n = params.n_players;
    let b = params.buffer;
    let n1 = params.informed.iter().filter(|&&i| i).count();
    if n1 == 0 {
        return Err(ProblemError::PreconditionViolated(
            "at least one informed player is required".into(),
        ));
    }
    let a: f64 = (0..n).filter(|&nu| !params.informed[nu]).map(|nu| params.lower[nu]).sum();
    let n1f = n1 as f64;
    let disc = (2.0 * a * n1f + b - b * n1f).powi(2) - 4.0 * n1f * n1f * (a * a - b * a);
    if disc < 0.0 {
        return Err(ProblemError::PreconditionViolated(format!(
            "discriminant ≥ 0 violated (got {disc})"
        )));
    }
    let xbar = (b * n1f - b - 2.0 * a * n1f + disc.sqrt()) / (2.0 * n1f * n1f);
    if xbar <= 0.0 {
        return Err(ProblemError::PreconditionViolated(format!("x̄ > 0 violated (got {xbar})")));
    }
    let s = a + n1f * xbar;
    if s >= b {
        return Err(ProblemError::PreconditionViolated(format!(
            "inactive capacity s < B violated (s = {s}, B = {b})"
        )));
    }
    let mut x = DVector::zeros(n);
    let mut lambda = Vec::new();
    for nu in 0..n {
        if params.informed[nu] {
            if params.lower[nu] >= xbar {
                return Err(ProblemError::PreconditionViolated(format!(
                    "informed bound inactive l[{nu}] < x̄ violated ({} ≥ {xbar})",
                    params.lower[nu]
                )));
            }
            if let Some(u) = params.upper[nu] {
                if xbar >= u {
                    return Err(ProblemError::PreconditionViolated(format!(
                        "informed bound inactive x̄ < upper[{nu}] violated ({xbar} ≥ {u})"
                    )));
                }
            }
            x[nu] = xbar;
            lambda.push(0.0); // lower
            if params.upper[nu].is_some() {
                lambda.push(0.0);
            }
            lambda.push(0.0); // shared
        } else {
            let l = params.lower[nu];
            // stationarity at the pinned bound: gradient = multiplier ≥ 0
            let mult = 1.0 / b - (s - l) / (s * s);
            if mult < 0.0 {
                return Err(ProblemError::PreconditionViolated(format!(
                    "uninformed player {nu} pinned at lower bound: multiplier ≥ 0 violated (got {mult})"
                )));
            }
            x[nu] = l;
            lambda.push(mult);
            if params.upper[nu].is_some() {
                lambda.push(0.0);
            }
        }
    }
    Ok(JointPoint::new(x, DVector::from_vec(lambda)))
}

/// One affine constraint row: coeffs·x ≤ rhs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineConstraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgnepPlayer {
    pub dim: usize,
    #[serde(default)]
    pub constraints: Vec<AffineConstraint>,
}

/// Serializable affine problem: the stacked objective gradients are
/// Qx + c (gradient_matrix is Q row-major as nested arrays, player blocks of
/// rows in order), constraints are affine rows over the full x.
/// `nonneg_variables` lists 1-based indices of variables that carry a
/// lower-bound row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgnepSpec {
    pub name: String,
    pub players: Vec<AgnepPlayer>,
    pub gradient_matrix: Vec<Vec<f64>>,
    pub gradient_offset: Vec<f64>,
    #[serde(default)]
    pub nonneg_variables: Vec<usize>,
}

impl AgnepSpec {
    pub fn n(&self) -> usize {
        self.players.iter().map(|p| p.dim).sum()
    }
}

pub fn make_agnep(spec: &AgnepSpec) -> Result<GnepProblem, ProblemError> {
    let n = spec.n();
    if spec.players.is_empty() || spec.players.iter().any(|p| p.dim == 0) {
        return Err(ProblemError::InvalidParams(
            "every player needs a positive dimension".into(),
        ));
    }
    if spec.gradient_matrix.len() != n || spec.gradient_matrix.iter().any(|r| r.len() != n) {
        return Err(ProblemError::InvalidParams(format!(
            "gradient_matrix must be {n}×{n}"
        )));
    }
    if spec.gradient_offset.len() != n {
        return Err(ProblemError::InvalidParams(format!(
            "gradient_offset must have {n} entries"
        )));
    }
    for (pi, p) in spec.players.iter().enumerate() {
        for (ci, c) in p.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(ProblemError::InvalidParams(format!(
                    "player {} constraint {}: coeffs must have {n} entries, got {}",
                    pi + 1,
                    ci + 1,
                    c.coeffs.len()
                )));
            }
        }
    }
    let all: Vec<f64> = spec
        .gradient_matrix
        .iter()
        .flatten()
        .chain(spec.gradient_offset.iter())
        .copied()
        .collect();
    if !all.iter().all(|t| t.is_finite()) {
        return Err(ProblemError::InvalidParams("gradient data must be finite".into()));
    }
    let mut nonneg = Vec::new();
    for &i in &spec.nonneg_variables {
        if i == 0 || i > n {
            return Err(ProblemError::InvalidParams(format!(
                "nonneg_variables entries are 1-based in 1..={n}, got {i}"
            )));
        }
        nonneg.push(i - 1);
    }

    let q = DMatrix::from_fn(n, n, |i, j| spec.gradient_matrix[i][j]);
    let c = DVector::from_vec(spec.gradient_offset.clone());
    let player_dims: Vec<usize> = spec.players.iter().map(|p| p.dim).collect();
    let constraint_dims: Vec<usize> = spec.players.iter().map(|p| p.constraints.len()).collect();
    let mut var_starts = vec![0usize; spec.players.len()];
    for i in 1..spec.players.len() {
        var_starts[i] = var_starts[i - 1] + player_dims[i - 1];
    }
    let jacs: Vec<DMatrix<f64>> = spec
        .players
        .iter()
        .map(|p| {
            DMatrix::from_fn(p.constraints.len(), n, |i, j| p.constraints[i].coeffs[j])
        })
        .collect();
    let rhs: Vec<DVector<f64>> = spec
        .players
        .iter()
        .map(|p| DVector::from_iterator(p.constraints.len(), p.constraints.iter().map(|c| c.rhs)))
        .collect();

    struct Shared {
        q: DMatrix<f64>,
        c: DVector<f64>,
        var_starts: Vec<usize>,
        player_dims: Vec<usize>,
        jacs: Vec<DMatrix<f64>>,
        rhs: Vec<DVector<f64>>,
    }
    let shared = Arc::new(Shared { q, c, var_starts, player_dims, jacs, rhs });
    let s_grad = Arc::clone(&shared);
    let s_cons = Arc::clone(&shared);
    let s_jac = Arc::clone(&shared);
    let s_hess = Arc::clone(&shared);
    Ok(GnepProblem::new(
        spec.name.clone(),
        shared.player_dims.clone(),
        constraint_dims,
        Arc::new(move |nu, x: &DVector<f64>| {
            let s = &s_grad;
            let rows = s.q.rows(s.var_starts[nu], s.player_dims[nu]);
            rows * x + s.c.rows(s.var_starts[nu], s.player_dims[nu])
        }),
        Arc::new(move |nu, x: &DVector<f64>| &s_cons.jacs[nu] * x - &s_cons.rhs[nu]),
        Arc::new(move |nu, _x: &DVector<f64>| s_jac.jacs[nu].clone()),
        Arc::new(move |nu, _l: &DVector<f64>, _x: &DVector<f64>| {
            s_hess.q.rows(s_hess.var_starts[nu], s_hess.player_dims[nu]).into_owned()
        }),
        nonneg,
        Convexity::PlayerConvex,
    ))
}

/// Seeded random affine problem. The stationarity Jacobian is D + S where D
/// is block-diagonal (one symmetric block per player with eigenvalues drawn
/// from [1, 3]) and S is skew-symmetric rescaled to spectral norm 0.4, so the
/// Jacobian's smallest singular value is at least 1 for every seed. Each
/// player gets `m_private` bound rows on its own variables (lower bounds
/// first, then upper, cycling through the block); `m_shared` jointly
/// generated rows with positive coefficients are replicated into every
/// player's block, each copy carrying its own multiplier. Right-hand sides
/// are chosen with slack at x = 0.5·1, so that point is strictly feasible
/// for every seed. The output is a pure function of the arguments.
///
/// With `m_shared = 0` every constraint row touches only its owner's
/// variables, which makes the reduced complementarity map monotone with a
/// positive margin; replicated shared rows give identical reduced-map rows
/// and drive the margin to zero, as in the bandwidth-sharing game.
pub fn make_random_agnep(
    seed: u64,
    player_dims: &[usize],
    m_private: usize,
    m_shared: usize,
) -> AgnepSpec {
    assert!(!player_dims.is_empty() && player_dims.iter().all(|&d| d > 0));
    let n: usize = player_dims.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uni = |rng: &mut ChaCha8Rng| rng.gen::<f64>() * 2.0 - 1.0;

    let mut var_starts = vec![0usize; player_dims.len()];
    for i in 1..player_dims.len() {
        var_starts[i] = var_starts[i - 1] + player_dims[i - 1];
    }

    // per-player symmetric blocks: rotate a diagonal with entries in [1, 3]
    // by the orthogonal factor of a random matrix
    let mut q = DMatrix::zeros(n, n);
    for (pi, &dim) in player_dims.iter().enumerate() {
        let eigs = DVector::from_fn(dim, |_, _| 1.0 + 2.0 * rng.gen::<f64>());
        let raw = DMatrix::from_fn(dim, dim, |_, _| uni(&mut rng));
        let rot = raw.qr().q();
        let block = &rot * DMatrix::from_diagonal(&eigs) * rot.transpose();
        q.view_mut((var_starts[pi], var_starts[pi]), (dim, dim)).copy_from(&block);
    }
    // full skew-symmetric coupling, rescaled to spectral norm 0.4
    let b = DMatrix::from_fn(n, n, |_, _| uni(&mut rng));
    let skew = (&b - b.transpose()) * 0.5;
    let norm = skew.clone().svd(false, false).singular_values.max();
    if norm > 1e-12 {
        q += skew * (0.4 / norm);
    }

    let mut players: Vec<AgnepPlayer> = Vec::with_capacity(player_dims.len());
    for (pi, &dim) in player_dims.iter().enumerate() {
        let mut constraints = Vec::new();
        for r in 0..m_private {
            let j = var_starts[pi] + r % dim;
            let slack = 0.1 + 0.5 * rng.gen::<f64>();
            let mut coeffs = vec![0.0; n];
            if (r / dim) % 2 == 0 {
                // lower bound: b − x_j ≤ 0 with b strictly below 0.5
                coeffs[j] = -1.0;
                constraints.push(AffineConstraint { coeffs, rhs: slack - 0.5 });
            } else {
                // upper bound: x_j − b ≤ 0 with b strictly above 0.5
                coeffs[j] = 1.0;
                constraints.push(AffineConstraint { coeffs, rhs: 0.5 + slack });
            }
        }
        players.push(AgnepPlayer { dim, constraints });
    }
    for _ in 0..m_shared {
        let coeffs: Vec<f64> = (0..n).map(|_| 0.1 + rng.gen::<f64>()).collect();
        let rhs = coeffs.iter().sum::<f64>() * 0.5 + 0.1 + 0.5 * rng.gen::<f64>();
        for p in players.iter_mut() {
            p.constraints.push(AffineConstraint { coeffs: coeffs.clone(), rhs });
        }
    }
    let c: Vec<f64> = (0..n).map(|_| uni(&mut rng)).collect();

    AgnepSpec {
        name: format!("agnep-seed{seed}"),
        players,
        gradient_matrix: (0..n).map(|i| (0..n).map(|j| q[(i, j)]).collect()).collect(),
        gradient_offset: c,
        nonneg_variables: vec![],
    }
}

pub fn load_agnep(path: impl AsRef<Path>) -> Result<AgnepSpec, ProblemError> {
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

pub fn save_agnep(path: impl AsRef<Path>, spec: &AgnepSpec) -> Result<(), ProblemError> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(spec).expect("spec serializes");
    std::fs::write(path, text).map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Map a problem identifier to an instance: a built-in name
/// (`switching10`, `two-player-quadratic`, `four-player-semistable`) or a
/// path to an affine-problem JSON file.
pub fn resolve_problem(id: &str) -> Result<GnepProblem, ProblemError> {
    match id {
        "switching10" => make_internet_switching(&switching_bench_params()),
        "two-player-quadratic" => Ok(make_two_player_quadratic()),
        "four-player-semistable" => Ok(make_four_player_semistable()),
        _ if id.ends_with(".json") || Path::new(id).exists() => {
            let spec = load_agnep(id)?;
            make_agnep(&spec)
        }
        _ => Err(ProblemError::InvalidParams(format!(
            "unknown problem id '{id}' (not a built-in name and not a .json path)"
        ))),
    }
}

/// Reference KKT pair of a built-in problem, where one is known.
pub fn builtin_solution(id: &str) -> Result<JointPoint, ProblemError> {
    match id {
        "switching10" => internet_switching_solution(&switching_bench_params()),
        "two-player-quadratic" => Ok(JointPoint::new(DVector::zeros(2), DVector::zeros(0))),
        "four-player-semistable" => Ok(four_player_solution()),
        _ => Err(ProblemError::InvalidParams(format!(
            "no reference solution for problem id '{id}'"
        ))),
    }
}
