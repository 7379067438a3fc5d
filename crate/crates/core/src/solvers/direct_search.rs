use crate::dc::{eval_phi, DcProblem, DfoEvent, SolverParams};
use crate::error::DcError;
use crate::linalg::axpy;
use crate::spanning::PositiveSpanningSet;
use crate::Point;

/// Decreases smaller than this fraction of `|g(y)| + |h(y)|` are treated as
/// rounding noise in `g − h` rather than progress. Without it, directions
/// along which `φ` is exactly flat (an empty cluster centroid, say) pass the
/// strict-decrease test about half the time.
pub const DFO_NOISE_REL: f64 = 1e-12;

/// Direct-search step size, carried across invocations within one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfoState {
    pub mu: f64,
}

impl DfoState {
    pub fn new(params: &SolverParams) -> Self {
        Self { mu: params.mu_bar }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DfoOutcome {
    /// `φ(y + μv) < φ(y)` for the listed direction.
    Escaped {
        point: Point,
        phi: f64,
        direction_index: usize,
        mu: f64,
    },
    /// No direction improved for any radius down to `eps2`.
    Certified,
}

/// Poll the spanning set around a point where the DCA step has stalled.
///
/// On entry `μ ← ημ + τ`. Directions are scanned in order and the first one
/// with a strict decrease (beyond [`DFO_NOISE_REL`]) is taken. A failed scan
/// shrinks `μ` by `β₂` and rescans while `μ > ε₂`; a failed scan at `μ ≤ ε₂`
/// certifies.
pub fn dfo_escape<P: DcProblem + ?Sized>(
    problem: &P,
    y: &[f64],
    pss: &PositiveSpanningSet,
    state: &mut DfoState,
    params: &SolverParams,
) -> Result<(DfoOutcome, DfoEvent), DcError> {
    if pss.dim() != problem.dim() {
        return Err(DcError::DimensionMismatch {
            expected: problem.dim(),
            got: pss.dim(),
        });
    }
    let phi_y = eval_phi(problem, y)?;
    let threshold = phi_y - DFO_NOISE_REL * (problem.eval_g(y).abs() + problem.eval_h(y).abs());
    state.mu = params.eta * state.mu + params.tau;
    let mut event = DfoEvent {
        mu_tried: Vec::new(),
        mu_accepted: None,
        direction_index: None,
    };
    loop {
        let mu = state.mu;
        event.mu_tried.push(mu);
        for (idx, v) in pss.directions().iter().enumerate() {
            let candidate = axpy(y, mu, v);
            let phi = eval_phi(problem, &candidate)?;
            if phi < threshold {
                event.mu_accepted = Some(mu);
                event.direction_index = Some(idx);
                return Ok((
                    DfoOutcome::Escaped {
                        point: candidate,
                        phi,
                        direction_index: idx,
                        mu,
                    },
                    event,
                ));
            }
        }
        if mu > params.eps2 {
            state.mu = params.beta2 * mu;
        } else {
            return Ok((DfoOutcome::Certified, event));
        }
    }
}
