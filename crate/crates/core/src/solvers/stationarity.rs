use serde::{Deserialize, Serialize};

use crate::dc::DcProblem;
use crate::error::DcError;
use crate::linalg::{axpy, dot};
use crate::spanning::PositiveSpanningSet;
use crate::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub point: Point,
    pub directions_checked: PositiveSpanningSet,
    /// `φ′(x; vᵢ)` for each direction, in order.
    pub dir_derivs: Vec<f64>,
    pub min_deriv: f64,
    pub is_d_stationary: bool,
    /// Whether `h′` came from the problem's exact formula.
    pub exact: bool,
}

/// `φ′(x; v) = ⟨∇g(x), v⟩ − h′(x; v)`.
///
/// Uses the problem's exact `h′` when available and a forward difference
/// with step `fd_step` otherwise. Returns the value and whether it was exact.
pub fn directional_derivative<P: DcProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    v: &[f64],
    fd_step: f64,
) -> (f64, bool) {
    let g_part = dot(&problem.grad_g(x), v);
    match problem.dir_deriv_h(x, v) {
        Some(h_part) => (g_part - h_part, true),
        None => {
            let h_part = (problem.eval_h(&axpy(x, fd_step, v)) - problem.eval_h(x)) / fd_step;
            (g_part - h_part, false)
        }
    }
}

/// A point is d-stationary iff `φ′(x; v) ≥ 0` for every member of a positive
/// spanning set; this tests that with tolerance `tol`.
///
/// With the finite-difference fallback the derivatives carry an `O(fd_step)`
/// error, so `tol` should be chosen well above it.
pub fn check_d_stationarity<P: DcProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    pss: &PositiveSpanningSet,
    tol: f64,
    fd_step: f64,
) -> Result<StationarityReport, DcError> {
    if x.len() != problem.dim() {
        return Err(DcError::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    if pss.dim() != problem.dim() {
        return Err(DcError::DimensionMismatch {
            expected: problem.dim(),
            got: pss.dim(),
        });
    }
    if !(tol >= 0.0) || !(fd_step > 0.0) {
        return Err(DcError::InvalidParams(
            "tol must be nonnegative and fd_step positive".into(),
        ));
    }
    let mut exact = true;
    let dir_derivs: Vec<f64> = pss
        .directions()
        .iter()
        .map(|v| {
            let (value, was_exact) = directional_derivative(problem, x, v, fd_step);
            exact &= was_exact;
            value
        })
        .collect();
    let min_deriv = dir_derivs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(StationarityReport {
        point: x.to_vec(),
        directions_checked: pss.clone(),
        dir_derivs,
        min_deriv,
        is_d_stationary: min_deriv >= -tol,
        exact,
    })
}
