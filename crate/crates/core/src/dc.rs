//! The DC-problem abstraction, solver parameters and run traces.

use serde::{Deserialize, Serialize};

use crate::error::DcError;
use crate::linalg::{dot, norm, norm_sq, sub};
use crate::Point;

/// A difference-of-convex program `min φ(x) = g(x) − h(x)` over `ℝᵐ`.
///
/// Implementors must satisfy the following contracts, which the solvers rely
/// on and which [`validate_problem`] spot-checks numerically:
///
/// * `g` and `h` are both `rho`-strongly convex, with `rho > 0`;
/// * `g` is continuously differentiable and [`grad_g`](Self::grad_g) returns
///   its gradient;
/// * [`subgrad_h`](Self::subgrad_h) returns an element of `∂h(x)`, chosen by
///   a fixed deterministic rule when the subdifferential is not a singleton;
/// * [`solve_subproblem`](Self::solve_subproblem) returns the unique
///   minimizer of `g(x) − ⟨u, x⟩`, i.e. the `y` with `∇g(y) = u`.
///
/// All oracles must be pure; a problem may be shared across threads.
pub trait DcProblem: Sync {
    fn dim(&self) -> usize;

    /// Strong convexity modulus shared by `g` and `h`.
    fn rho(&self) -> f64;

    fn eval_g(&self, x: &[f64]) -> f64;

    fn eval_h(&self, x: &[f64]) -> f64;

    fn grad_g(&self, x: &[f64]) -> Point;

    fn subgrad_h(&self, x: &[f64]) -> Point;

    fn solve_subproblem(&self, u: &[f64]) -> Point;

    /// Exact one-sided directional derivative `h′(x; d)`, if the problem can
    /// provide one.
    fn dir_deriv_h(&self, _x: &[f64], _d: &[f64]) -> Option<f64> {
        None
    }

    /// A problem-specific closed form of `φ`, used only for cross-checking
    /// `g − h`. Solvers never call this.
    fn phi_direct(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// `φ(x) = g(x) − h(x)`.
pub fn eval_phi<P: DcProblem + ?Sized>(problem: &P, x: &[f64]) -> Result<f64, DcError> {
    if x.len() != problem.dim() {
        return Err(DcError::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    let value = problem.eval_g(x) - problem.eval_h(x);
    if !value.is_finite() {
        return Err(DcError::NonFinite {
            what: "φ = g − h"
        });
    }
    Ok(value)
}

/// How the trial step `λ̄ₖ` of the boosting line search is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TrialStepRule {
    /// `λ̄₀ = 0`, `λ̄₁ = lambda_bar1`, then grow by `gamma` after two
    /// consecutive iterations without backtracking, else reuse `λₖ₋₁`.
    SelfAdaptive,
    /// The same trial step at every iteration. `Fixed(0.0)` turns BDCA into
    /// DCA (and BDCA+ into DCA followed by direct search).
    Fixed(f64),
}

/// Tuning constants for DCA, BDCA and BDCA+.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Armijo coefficient.
    pub alpha: f64,
    /// Line-search shrink factor.
    pub beta1: f64,
    /// Direct-search shrink factor.
    pub beta2: f64,
    /// Stop the DCA/BDCA phase when `‖dₖ‖ ≤ eps1`.
    pub eps1: f64,
    /// Direct search certifies once the step size drops to `eps2` or below.
    pub eps2: f64,
    /// Initial direct-search step size.
    pub mu_bar: f64,
    /// On each direct-search entry, `μ ← eta·μ + tau`.
    pub eta: f64,
    pub tau: f64,
    /// Growth factor of the self-adaptive trial step.
    pub gamma: f64,
    /// First nonzero trial step of the self-adaptive rule.
    pub lambda_bar1: f64,
    pub trial_rule: TrialStepRule,
    pub max_iter: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        let beta2 = 0.5;
        let eps2 = 1e-4;
        Self {
            alpha: 1e-4,
            beta1: 0.25,
            beta2,
            eps1: 1e-8,
            eps2,
            mu_bar: 10.0,
            eta: 1.0 / beta2,
            tau: eps2,
            gamma: 2.0,
            lambda_bar1: 10.0,
            trial_rule: TrialStepRule::SelfAdaptive,
            max_iter: 10_000,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), DcError> {
        let bad = |msg: &str| Err(DcError::InvalidParams(msg.to_string()));
        let all = [
            self.alpha,
            self.beta1,
            self.beta2,
            self.eps1,
            self.eps2,
            self.mu_bar,
            self.eta,
            self.tau,
            self.gamma,
            self.lambda_bar1,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all parameters must be finite");
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return bad("beta1 must lie in (0, 1)");
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta2 must lie in (0, 1)");
        }
        if self.eps1 < 0.0 || self.eta < 0.0 || self.tau < 0.0 {
            return bad("eps1, eta and tau must be nonnegative");
        }
        if !(self.eps2 > 0.0 && self.mu_bar > 0.0) {
            return bad("eps2 and mu_bar must be positive");
        }
        if !(self.gamma > 1.0) {
            return bad("gamma must exceed 1");
        }
        if !(self.lambda_bar1 > 0.0) {
            return bad("lambda_bar1 must be positive");
        }
        if let TrialStepRule::Fixed(t) = self.trial_rule {
            if !(t >= 0.0 && t.is_finite()) {
                return bad("fixed trial step must be a nonnegative finite number");
            }
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        Ok(())
    }
}

/// What happened during one direct-search invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfoEvent {
    /// Every radius that was scanned, in order.
    pub mu_tried: Vec<f64>,
    /// The radius at which an improving direction was found.
    pub mu_accepted: Option<f64>,
    /// Index of the improving direction within the spanning set.
    pub direction_index: Option<usize>,
}

/// One pass through the main loop of a solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub x_k: Point,
    pub y_k: Point,
    /// Always `y_k − x_k`.
    pub d_k: Point,
    pub phi_x: f64,
    pub phi_y: f64,
    /// Accepted line-search step; 0 for plain DCA steps and direct-search
    /// iterations.
    pub lambda_k: f64,
    pub lambda_trial: f64,
    pub dfo_event: Option<DfoEvent>,
}

impl IterationRecord {
    pub fn norm_d(&self) -> f64 {
        norm(&self.d_k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    /// `‖dₖ‖ ≤ eps1` in DCA or BDCA.
    CriticalPoint,
    /// BDCA+ found no improving direction down to radius `eps2`.
    DStationaryCertified,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub final_point: Point,
    pub final_phi: f64,
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
    pub dfo_invocations: usize,
    /// Wall-clock seconds.
    pub wall_time: f64,
}

impl RunResult {
    /// `φ(x₀), φ(x₁), …` followed by the final objective value.
    pub fn phi_sequence(&self) -> Vec<f64> {
        let mut seq: Vec<f64> = self.iterations.iter().map(|r| r.phi_x).collect();
        seq.push(self.final_phi);
        seq
    }
}

/// Outcome of one numerical check in [`validate_problem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub passed: bool,
    /// Largest violation observed (relative error for the gradient check,
    /// scaled excess for the inequality checks).
    pub worst: f64,
    /// Sample indices responsible for the first failure.
    pub offending: Option<(usize, usize)>,
}

impl CheckOutcome {
    fn new() -> Self {
        Self {
            passed: true,
            worst: 0.0,
            offending: None,
        }
    }

    fn record(&mut self, violation: f64, threshold: f64, pair: (usize, usize)) {
        if violation > self.worst {
            self.worst = violation;
        }
        if violation > threshold && self.passed {
            self.passed = false;
            self.offending = Some(pair);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub gradient: CheckOutcome,
    pub subgradient: CheckOutcome,
    pub strong_convexity: CheckOutcome,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.gradient.passed && self.subgradient.passed && self.strong_convexity.passed
    }
}

pub const GRADIENT_REL_TOL: f64 = 1e-5;
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Central-difference gradient of `g` with per-coordinate step
/// `fd_step·(1 + |xᵢ|)`.
pub fn fd_gradient_g<P: DcProblem + ?Sized>(problem: &P, x: &[f64], fd_step: f64) -> Point {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = fd_step * (1.0 + x[i].abs());
            probe[i] = x[i] + h;
            let plus = problem.eval_g(&probe);
            probe[i] = x[i] - h;
            let minus = problem.eval_g(&probe);
            probe[i] = x[i];
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// Numerically spot-checks the contracts of [`DcProblem`] on `samples`.
///
/// 1. Central-difference gradient of `g` vs. `grad_g`, relative error
///    `‖fd − ∇g‖ / max(‖∇g‖, 1) ≤ 1e-5` at each sample.
/// 2. Subgradient inequality `h(y) ≥ h(x) + ⟨s(x), y − x⟩` over all ordered
///    sample pairs.
/// 3. Midpoint convexity of `g − (ρ/2)‖·‖²` over all sample pairs.
///
/// The inequality checks allow a slack of `1e-9·(1 + |lhs| + |rhs|)` for
/// rounding.
pub fn validate_problem<P: DcProblem + ?Sized>(
    problem: &P,
    samples: &[Point],
    fd_step: f64,
) -> Result<ValidationReport, DcError> {
    if samples.is_empty() {
        return Err(DcError::InvalidInput("no samples given".into()));
    }
    if !(fd_step > 0.0) {
        return Err(DcError::InvalidParams("fd_step must be positive".into()));
    }
    let dim = problem.dim();
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(DcError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let rho = problem.rho();
    let mut report = ValidationReport {
        gradient: CheckOutcome::new(),
        subgradient: CheckOutcome::new(),
        strong_convexity: CheckOutcome::new(),
    };

    let h_vals: Vec<f64> = samples.iter().map(|s| problem.eval_h(s)).collect();
    let subgrads: Vec<Point> = samples.iter().map(|s| problem.subgrad_h(s)).collect();
    let shifted_g = |x: &[f64]| problem.eval_g(x) - 0.5 * rho * norm_sq(x);
    let q_vals: Vec<f64> = samples.iter().map(|s| shifted_g(s)).collect();

    for (i, x) in samples.iter().enumerate() {
        let analytic = problem.grad_g(x);
        let numeric = fd_gradient_g(problem, x, fd_step);
        let err = norm(&sub(&numeric, &analytic)) / norm(&analytic).max(1.0);
        report.gradient.record(err, GRADIENT_REL_TOL, (i, i));
    }

    for (i, x) in samples.iter().enumerate() {
        for (j, y) in samples.iter().enumerate() {
            if i == j {
                continue;
            }
            let diff = sub(y, x);
            let lower = h_vals[i] + dot(&subgrads[i], &diff);
            let scale = 1.0 + lower.abs() + h_vals[j].abs();
            report
                .subgradient
                .record((lower - h_vals[j]) / scale, INEQUALITY_SLACK, (i, j));

            if j > i {
                let mid: Point = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
                let at_mid = shifted_g(&mid);
                let chord = 0.5 * (q_vals[i] + q_vals[j]);
                let scale = 1.0 + at_mid.abs() + chord.abs();
                report
                    .strong_convexity
                    .record((at_mid - chord) / scale, INEQUALITY_SLACK, (i, j));
            }
        }
    }
    Ok(report)
}
