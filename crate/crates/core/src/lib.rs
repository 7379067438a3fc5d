//! Minimization of differences of convex functions.
//!
//! This crate provides three solvers for problems of the form
//! `min φ(x) = g(x) − h(x)` where `g` is smooth and strongly convex and `h`
//! is convex (possibly nonsmooth) with the same strong-convexity modulus:
//!
//! * [DCA](solvers::run_dca), the classical DC algorithm, which linearizes
//!   `h` at the current iterate and minimizes the convex surrogate;
//! * [BDCA](solvers::run_bdca), which follows each DCA step with an Armijo
//!   backtracking line search along `d = y − x`;
//! * [BDCA+](solvers::run_bdca_plus), which additionally runs a direct
//!   search over a [positive spanning set](spanning) whenever BDCA stalls,
//!   so that the returned point is d-stationary rather than merely critical.
//!
//! Two test problems are bundled in [`problems`]: a two-dimensional
//! nonsmooth function with four critical points, and Minimum Sum-of-Squares
//! Clustering. The [`bench`] module contains the multi-start harness used to
//! compare the algorithms.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod dc;
pub mod error;
pub mod linalg;
pub mod problems;
pub mod solvers;
pub mod spanning;

pub use dc::{
    eval_phi, validate_problem, DcProblem, DfoEvent, IterationRecord, RunResult, SolverParams,
    Termination, TrialStepRule, ValidationReport,
};
pub use error::DcError;
pub use spanning::{PositiveSpanningSet, PssKind};

/// Dense point in `ℝᵐ`.
pub type Point = Vec<f64>;
