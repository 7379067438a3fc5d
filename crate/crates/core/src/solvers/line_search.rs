use log::warn;

use crate::dc::{eval_phi, DcProblem};
use crate::error::DcError;
use crate::linalg::{axpy, norm_sq};
use crate::Point;

/// Steps below this are treated as zero.
pub const LAMBDA_FLOOR: f64 = 1e-14;
/// Upper bound on shrinks per line search.
pub const MAX_BACKTRACKS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub lambda: f64,
    /// `y + λd`
    pub point: Point,
    /// `φ(y + λd)`
    pub phi: f64,
    pub backtracks: usize,
}

/// Backtracking along `d` from `y`: tries `λ̄, β₁λ̄, β₁²λ̄, …` and accepts the
/// first `λ` with `φ(y + λd) ≤ φ(y) − αλ²‖d‖²`.
///
/// A zero trial step is accepted immediately. If `λ` drops below
/// [`LAMBDA_FLOOR`] or [`MAX_BACKTRACKS`] shrinks are exhausted, the search
/// gives up and returns `λ = 0`.
pub fn armijo_search<P: DcProblem + ?Sized>(
    problem: &P,
    y: &[f64],
    phi_y: f64,
    d: &[f64],
    lambda_trial: f64,
    alpha: f64,
    beta1: f64,
) -> Result<LineSearchResult, DcError> {
    let rejected = || LineSearchResult {
        lambda: 0.0,
        point: y.to_vec(),
        phi: phi_y,
        backtracks: 0,
    };
    if !(lambda_trial > 0.0) {
        return Ok(rejected());
    }
    let d_sq = norm_sq(d);
    let mut lambda = lambda_trial;
    for backtracks in 0..=MAX_BACKTRACKS {
        if lambda < LAMBDA_FLOOR {
            warn!("line search step fell below {LAMBDA_FLOOR:e}; taking a plain DCA step");
            return Ok(LineSearchResult {
                backtracks,
                ..rejected()
            });
        }
        let point = axpy(y, lambda, d);
        let phi = eval_phi(problem, &point)?;
        if phi <= phi_y - alpha * lambda * lambda * d_sq {
            return Ok(LineSearchResult {
                lambda,
                point,
                phi,
                backtracks,
            });
        }
        lambda *= beta1;
    }
    warn!("line search exhausted {MAX_BACKTRACKS} backtracks; taking a plain DCA step");
    Ok(LineSearchResult {
        backtracks: MAX_BACKTRACKS,
        ..rejected()
    })
}

/// Accepted step of [`armijo_search`].
pub fn armijo_backtrack<P: DcProblem + ?Sized>(
    problem: &P,
    y: &[f64],
    d: &[f64],
    lambda_trial: f64,
    alpha: f64,
    beta1: f64,
) -> Result<f64, DcError> {
    let phi_y = eval_phi(problem, y)?;
    armijo_search(problem, y, phi_y, d, lambda_trial, alpha, beta1).map(|r| r.lambda)
}

/// History needed by the self-adaptive trial step rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SelfAdaptiveState {
    /// `λₖ₋₁`
    pub lambda_prev: f64,
    /// `λₖ₋₂`
    pub lambda_prev2: f64,
    /// `λ̄ₖ₋₁`
    pub trial_prev: f64,
    /// `λ̄ₖ₋₂`
    pub trial_prev2: f64,
    /// Number of line searches recorded so far.
    pub k: usize,
}

impl SelfAdaptiveState {
    pub fn record(&mut self, lambda: f64, trial: f64) {
        debug_assert!(lambda <= trial);
        self.lambda_prev2 = self.lambda_prev;
        self.trial_prev2 = self.trial_prev;
        self.lambda_prev = lambda;
        self.trial_prev = trial;
        self.k += 1;
    }
}

/// `λ̄₀ = 0`, `λ̄₁ = lambda_bar1`; afterwards `γλₖ₋₁` when neither of the
/// last two line searches backtracked (and both had a positive trial), else
/// `λₖ₋₁`. "Did not backtrack" is exact equality of accepted and trial step.
pub fn next_trial_step(state: &SelfAdaptiveState, gamma: f64, lambda_bar1: f64) -> f64 {
    match state.k {
        0 => 0.0,
        1 => lambda_bar1,
        _ => {
            let untouched = state.lambda_prev2 == state.trial_prev2
                && state.lambda_prev == state.trial_prev
                && state.trial_prev > 0.0
                && state.trial_prev2 > 0.0;
            if untouched {
                gamma * state.lambda_prev
            } else {
                state.lambda_prev
            }
        }
    }
}
