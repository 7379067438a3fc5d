use crate::dc::{eval_phi, DcProblem};
use crate::error::DcError;
use crate::linalg::{all_finite, norm, norm_sq, sub};
use crate::Point;

pub const SUBPROBLEM_REL_TOL: f64 = 1e-8;
pub const DESCENT_SLACK: f64 = 1e-9;

/// Result of linearizing `h` at `x` and minimizing the convex surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct DcaStep {
    /// Selected subgradient `u ∈ ∂h(x)`.
    pub u: Point,
    /// Minimizer of `g(·) − ⟨u, ·⟩`.
    pub y: Point,
    /// `y − x`.
    pub d: Point,
    pub phi_x: f64,
    pub phi_y: f64,
}

/// One DCA step from `x`, with the subproblem residual and the sufficient
/// decrease `φ(y) ≤ φ(x) − ρ‖d‖²` both checked. Either failure means the
/// problem's oracles are inconsistent.
pub fn dca_step<P: DcProblem + ?Sized>(problem: &P, x: &[f64]) -> Result<DcaStep, DcError> {
    if x.len() != problem.dim() {
        return Err(DcError::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    if !all_finite(x) {
        return Err(DcError::NonFinite { what: "iterate" });
    }
    let u = problem.subgrad_h(x);
    if !all_finite(&u) {
        return Err(DcError::NonFinite {
            what: "subgradient of h",
        });
    }
    let y = problem.solve_subproblem(&u);
    if !all_finite(&y) {
        return Err(DcError::NonFinite {
            what: "subproblem solution",
        });
    }
    let residual = norm(&sub(&problem.grad_g(&y), &u));
    let bound = SUBPROBLEM_REL_TOL * (1.0 + norm(&u));
    if !(residual <= bound) {
        return Err(DcError::SubproblemResidual { residual, bound });
    }
    let d = sub(&y, x);
    let phi_x = eval_phi(problem, x)?;
    let phi_y = eval_phi(problem, &y)?;
    Ok(DcaStep {
        u,
        y,
        d,
        phi_x,
        phi_y,
    })
}

/// Verifies `φ(y) ≤ φ(x) − ρ‖d‖² + 1e-9·(1 + |φ(x)|)`.
pub fn check_descent(
    iteration: usize,
    phi_x: f64,
    phi_y: f64,
    rho: f64,
    d: &[f64],
) -> Result<(), DcError> {
    let bound = phi_x - rho * norm_sq(d) + DESCENT_SLACK * (1.0 + phi_x.abs());
    if phi_y <= bound {
        Ok(())
    } else {
        Err(DcError::DescentViolation {
            iteration,
            phi_y,
            bound,
        })
    }
}
