use std::time::Instant;

use crate::dc::{
    eval_phi, DcProblem, IterationRecord, RunResult, SolverParams, Termination, TrialStepRule,
};
use crate::error::DcError;
use crate::linalg::{all_finite, norm};
use crate::spanning::PositiveSpanningSet;
use crate::Point;

use super::direct_search::{dfo_escape, DfoOutcome, DfoState};
use super::line_search::{armijo_search, next_trial_step, SelfAdaptiveState};
use super::step::{check_descent, dca_step};

enum Mode<'a> {
    Dca,
    Bdca,
    BdcaPlus(&'a PositiveSpanningSet),
}

/// Classical DCA: `x_{k+1} = y_k` until `‖y_k − x_k‖ ≤ eps1`.
pub fn run_dca<P: DcProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    params: &SolverParams,
) -> Result<RunResult, DcError> {
    run(problem, x0, params, Mode::Dca)
}

/// Boosted DCA: each DCA step is followed by an Armijo line search along
/// `d_k` from `y_k`, with trial steps chosen by `params.trial_rule`.
pub fn run_bdca<P: DcProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    params: &SolverParams,
) -> Result<RunResult, DcError> {
    run(problem, x0, params, Mode::Bdca)
}

/// BDCA with a direct-search step over `pss` whenever the DCA step stalls.
/// Terminates only when the direct search certifies d-stationarity (or at
/// `max_iter`).
pub fn run_bdca_plus<P: DcProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    pss: &PositiveSpanningSet,
    params: &SolverParams,
) -> Result<RunResult, DcError> {
    if pss.dim() != problem.dim() {
        return Err(DcError::DimensionMismatch {
            expected: problem.dim(),
            got: pss.dim(),
        });
    }
    run(problem, x0, params, Mode::BdcaPlus(pss))
}

fn run<P: DcProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    params: &SolverParams,
    mode: Mode<'_>,
) -> Result<RunResult, DcError> {
    params.validate()?;
    if x0.len() != problem.dim() {
        return Err(DcError::DimensionMismatch {
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    if !all_finite(x0) {
        return Err(DcError::NonFinite {
            what: "starting point",
        });
    }
    let rho = problem.rho();
    if !(rho > 0.0) {
        return Err(DcError::InvalidParams(
            "problem rho must be positive".into(),
        ));
    }

    let started = Instant::now();
    let mut x: Point = x0.to_vec();
    let mut iterations = Vec::new();
    let mut adaptive = SelfAdaptiveState::default();
    let mut dfo = DfoState::new(params);
    let mut dfo_invocations = 0;

    for k in 0..params.max_iter {
        let step = dca_step(problem, &x)?;
        check_descent(k, step.phi_x, step.phi_y, rho, &step.d)?;
        let mut record = IterationRecord {
            k,
            x_k: x,
            y_k: step.y,
            d_k: step.d,
            phi_x: step.phi_x,
            phi_y: step.phi_y,
            lambda_k: 0.0,
            lambda_trial: 0.0,
            dfo_event: None,
        };

        if norm(&record.d_k) > params.eps1 {
            x = match mode {
                Mode::Dca => record.y_k.clone(),
                Mode::Bdca | Mode::BdcaPlus(_) => {
                    let trial = match params.trial_rule {
                        TrialStepRule::SelfAdaptive => {
                            next_trial_step(&adaptive, params.gamma, params.lambda_bar1)
                        }
                        TrialStepRule::Fixed(t) => t,
                    };
                    let search = armijo_search(
                        problem,
                        &record.y_k,
                        record.phi_y,
                        &record.d_k,
                        trial,
                        params.alpha,
                        params.beta1,
                    )?;
                    adaptive.record(search.lambda, trial);
                    record.lambda_trial = trial;
                    record.lambda_k = search.lambda;
                    search.point
                }
            };
            iterations.push(record);
            continue;
        }

        match mode {
            Mode::Dca | Mode::Bdca => {
                return Ok(finish(
                    record.y_k.clone(),
                    record.phi_y,
                    iterations_with(iterations, record),
                    Termination::CriticalPoint,
                    dfo_invocations,
                    started,
                ));
            }
            Mode::BdcaPlus(pss) => {
                dfo_invocations += 1;
                let (outcome, event) = dfo_escape(problem, &record.y_k, pss, &mut dfo, params)?;
                record.dfo_event = Some(event);
                match outcome {
                    DfoOutcome::Escaped { point, .. } => {
                        x = point;
                        iterations.push(record);
                    }
                    DfoOutcome::Certified => {
                        return Ok(finish(
                            record.y_k.clone(),
                            record.phi_y,
                            iterations_with(iterations, record),
                            Termination::DStationaryCertified,
                            dfo_invocations,
                            started,
                        ));
                    }
                }
            }
        }
    }

    let final_phi = eval_phi(problem, &x)?;
    Ok(finish(
        x,
        final_phi,
        iterations,
        Termination::MaxIterations,
        dfo_invocations,
        started,
    ))
}

fn iterations_with(
    mut iterations: Vec<IterationRecord>,
    last: IterationRecord,
) -> Vec<IterationRecord> {
    iterations.push(last);
    iterations
}

fn finish(
    final_point: Point,
    final_phi: f64,
    iterations: Vec<IterationRecord>,
    termination: Termination,
    dfo_invocations: usize,
    started: Instant,
) -> RunResult {
    RunResult {
        final_point,
        final_phi,
        iterations,
        termination,
        dfo_invocations,
        wall_time: started.elapsed().as_secs_f64(),
    }
}
