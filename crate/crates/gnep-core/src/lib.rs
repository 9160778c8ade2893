//! Solver library for generalized Nash equilibrium problems given through
//! first-order oracles. The main entry point is [`slcp::slcp_solve`], which
//! linearizes the KKT complementarity system at each iterate, solves the
//! resulting mixed linear complementarity subproblem, and globalizes with a
//! penalized nonsmooth merit function. Around it:
//!
//! - [`model`] — problem container, oracle signatures, evaluation counters;
//! - [`kkt`] — merit function, directional derivatives, KKT residual;
//! - [`lcp`] — standard LCP solvers (Levenberg–Marquardt on the
//!   Fischer–Burmeister system, an infeasible interior-point method, and an
//!   exhaustive enumerator used as test oracle) plus a solvability
//!   certificate for PSD matrices;
//! - [`subproblem`] — reduction of the mixed subproblem to a standard LCP
//!   and the dispatch between reductions and solvers;
//! - [`slcp`] — the outer driver with line search and penalty adaptation;
//! - [`diagnostics`] — monotonicity constants, active-set classification,
//!   semistability / strong-regularity checks, error-bound probing;
//! - [`problems`] — built-in test problems with closed-form solutions and a
//!   JSON format for affine problems, including a seeded random generator;
//! - [`bench`] — a semismooth-Newton baseline, suite runner, CSV records,
//!   and performance profiles.

pub mod bench;
pub(crate) mod cone;
pub mod diagnostics;
pub mod kkt;
pub mod lcp;
pub mod model;
pub mod problems;
pub mod slcp;
pub mod subproblem;

pub use bench::{
    performance_profile, run_suite, solve_smm_baseline, Metric, ProfileResult, RunRecord,
    RunStatus, SolverKind, SuiteConfig,
};
pub use diagnostics::{diagnose, DiagnoseOptions, DiagnosticsReport, Verdict};
pub use kkt::{kkt_residual, merit, MeritValue};
pub use model::{EvalCounters, EvalError, GnepProblem, JointPoint};
pub use problems::{builtin_solution, resolve_problem, ProblemError};
pub use slcp::{slcp_solve, SlcpOptions, SolveResult, SolveStatus};
