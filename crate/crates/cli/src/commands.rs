use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use dcboost::bench::{
    run_pairwise_mssc, run_table1, start_rng, Algorithm, ExperimentSpec, UNCLASSIFIED,
};
use dcboost::problems::{generate_blobs, load_points_csv, BlobSpec, Example2dProblem, MsscProblem};
use dcboost::solvers::check_d_stationarity;
use dcboost::{DcError, IterationRecord, Point, PssKind, SolverParams, Termination};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::args::{
    AlgoArg, CheckArgs, ClusterArgs, DataArgs, GenerateArgs, ProblemKind, SolveArgs, Table1Args,
};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_STATIONARY: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }
}

impl From<DcError> for Failure {
    fn from(e: DcError) -> Self {
        let code = match e {
            DcError::DimensionMismatch { .. }
            | DcError::InvalidParams(_)
            | DcError::InvalidInput(_)
            | DcError::Parse { .. } => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_FAILURE,
            error,
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

/// JSON written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub algorithm: Algorithm,
    pub problem: String,
    pub x0: Point,
    pub final_point: Point,
    pub final_phi: f64,
    pub termination: Termination,
    pub iterations: Vec<IterationRecord>,
    pub dfo_invocations: usize,
    pub wall_time_s: Option<f64>,
}

/// JSON written by `cluster`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub n_points: usize,
    pub k: usize,
    pub rho: f64,
    pub n_starts: usize,
    pub seed: u64,
    pub pss: PssKind,
    /// Fraction of pairs where BDCA+ ends strictly below DCA.
    pub win_fraction: f64,
    /// Fraction of pairs with `gap > 1e-6`.
    pub strict_improvement_fraction: f64,
    /// Pairs where BDCA+ ends above DCA by more than `1e-12`.
    pub worse_count: usize,
    pub mean_gap: f64,
    pub max_gap: f64,
    pub min_gap: f64,
    pub mean_time_ratio: Option<f64>,
}

pub const STRICT_GAP: f64 = 1e-6;
pub const WORSE_SLACK: f64 = 1e-12;

fn algorithm(a: AlgoArg) -> Algorithm {
    match a {
        AlgoArg::Dca => Algorithm::Dca,
        AlgoArg::Bdca => Algorithm::Bdca,
        AlgoArg::BdcaPlus => Algorithm::BdcaPlus,
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Shortest representation that parses back to the same value.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value).context("writing JSON")?;
    writeln!(w).context("writing JSON")?;
    w.flush().context("writing JSON")?;
    Ok(())
}

fn example2d(sign_at_zero: f64) -> Result<Example2dProblem, Failure> {
    if !(-1.0..=1.0).contains(&sign_at_zero) {
        return Err(Failure::usage(anyhow!(
            "--sign-at-zero must lie in [-1, 1], got {sign_at_zero}"
        )));
    }
    Ok(Example2dProblem::new(sign_at_zero))
}

fn mssc(data: &DataArgs, seed: u64) -> Result<MsscProblem, Failure> {
    let points = match (&data.data, data.blobs) {
        (Some(path), _) => load_points_csv(path).map_err(|e| {
            Failure::usage(anyhow!(e).context(format!("reading {}", path.display())))
        })?,
        (None, Some((n_blobs, per_blob))) => {
            let spec = BlobSpec {
                spread: data.spread,
                lo: data.bbox.0,
                hi: data.bbox.1,
                ..BlobSpec::planar(n_blobs, per_blob)
            };
            generate_blobs(&spec, data.data_seed.unwrap_or(seed))?
        }
        (None, None) => {
            return Err(Failure::usage(anyhow!(
                "clustering needs either --data FILE or --blobs NxP"
            )))
        }
    };
    Ok(match data.rho {
        Some(rho) => MsscProblem::with_rho(points, data.k, rho)?,
        None => MsscProblem::new(points, data.k)?,
    })
}

fn validated(params: SolverParams) -> Result<SolverParams, Failure> {
    params.validate()?;
    Ok(params)
}

pub fn solve(a: SolveArgs) -> CmdResult {
    let params = validated(a.params.resolve())?;
    let alg = algorithm(a.algo);
    let pss = PssKind::from(a.pss);
    let mut rng = start_rng(a.seed, 0);
    let (x0, run) = match a.problem {
        ProblemKind::Example2d => {
            let problem = example2d(a.sign_at_zero)?;
            let x0 = a.x0.clone().map(|c| c.0).unwrap_or_else(|| {
                vec![rng.random_range(-1.5..=1.5), rng.random_range(-1.5..=1.5)]
            });
            let run = alg.run(&problem, &x0, pss, &params)?;
            (x0, run)
        }
        ProblemKind::Mssc => {
            let problem = mssc(&a.data, a.seed)?;
            let x0 =
                a.x0.clone()
                    .map(|c| c.0)
                    .unwrap_or_else(|| problem.random_start(&mut rng));
            let run = alg.run(&problem, &x0, pss, &params)?;
            (x0, run)
        }
    };
    log::info!(
        "{} on {}: phi = {} after {} iterations ({:?})",
        alg.name(),
        a.problem.name(),
        run.final_phi,
        run.iterations.len(),
        run.termination
    );

    if let Some(path) = &a.trace_csv {
        write_trace(path, &run.iterations)?;
    }
    let out = SolveOutput {
        algorithm: alg,
        problem: a.problem.name().to_string(),
        x0,
        final_point: run.final_point,
        final_phi: run.final_phi,
        termination: run.termination,
        iterations: run.iterations,
        dfo_invocations: run.dfo_invocations,
        wall_time_s: a.timings.then_some(run.wall_time),
    };
    write_json(a.out.as_deref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn write_trace(path: &Path, iterations: &[IterationRecord]) -> Result<(), Failure> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["k", "phi_x", "phi_y", "norm_d", "lambda", "mu_event"])
        .context("writing trace")?;
    for r in iterations {
        // Empty: no direct search. A number: accepted radius. `certified`: none found.
        let mu_event = match &r.dfo_event {
            None => String::new(),
            Some(ev) => match ev.mu_accepted {
                Some(mu) => num(mu),
                None => "certified".to_string(),
            },
        };
        w.write_record([
            r.k.to_string(),
            num(r.phi_x),
            num(r.phi_y),
            num(r.norm_d()),
            num(r.lambda_k),
            mu_event,
        ])
        .context("writing trace")?;
    }
    w.flush().context("writing trace")?;
    Ok(())
}

pub fn check(a: CheckArgs) -> CmdResult {
    if !(a.tol >= 0.0) || !(a.fd_step > 0.0) {
        return Err(Failure::usage(anyhow!(
            "--tol must be >= 0 and --fd-step > 0"
        )));
    }
    let report = match a.problem {
        ProblemKind::Example2d => {
            let problem = example2d(a.sign_at_zero)?;
            let pss = PssKind::from(a.pss).build(2)?;
            check_d_stationarity(&problem, &a.point.0, &pss, a.tol, a.fd_step)?
        }
        ProblemKind::Mssc => {
            let problem = mssc(&a.data, a.seed)?;
            let pss = PssKind::from(a.pss).build(dcboost::DcProblem::dim(&problem))?;
            check_d_stationarity(&problem, &a.point.0, &pss, a.tol, a.fd_step)?
        }
    };
    write_json(a.out.as_deref(), &report)?;
    Ok(if report.is_d_stationary {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_STATIONARY)
    })
}

fn experiment(
    n_starts: usize,
    seed: u64,
    pss: PssKind,
    params: SolverParams,
    workers: Option<usize>,
    timings: bool,
) -> Result<ExperimentSpec, Failure> {
    if workers == Some(0) {
        return Err(Failure::usage(anyhow!("--workers must be at least 1")));
    }
    Ok(ExperimentSpec {
        pss,
        params: validated(params)?,
        workers,
        record_timings: timings,
        ..ExperimentSpec::new(n_starts, seed)
    })
}

pub fn table1(a: Table1Args) -> CmdResult {
    let spec = experiment(
        a.starts,
        a.seed,
        a.pss.into(),
        a.params.resolve(),
        a.workers,
        a.timings,
    )?;
    let problem = example2d(a.sign_at_zero)?;
    let report = run_table1(&spec, &problem)?;

    let mut w = csv::Writer::from_writer(output(a.out_csv.as_deref())?);
    let mut header = vec!["algorithm".to_string()];
    header.extend(report.labels.iter().cloned());
    w.write_record(&header).context("writing CSV")?;
    for runs in &report.algorithms {
        let mut row = vec![runs.algorithm.name().to_string()];
        row.extend(
            report
                .labels
                .iter()
                .map(|l| report.count(runs.algorithm, l).to_string()),
        );
        w.write_record(&row).context("writing CSV")?;
        let missed = report.count(runs.algorithm, UNCLASSIFIED);
        if missed > 0 {
            log::warn!(
                "{}: {missed} runs ended away from every critical point",
                runs.algorithm.name()
            );
        }
    }
    w.flush().context("writing CSV")?;
    drop(w);

    if let Some(path) = &a.out_json {
        write_json(Some(path), &report)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn cluster(a: ClusterArgs) -> CmdResult {
    let spec = experiment(
        a.starts,
        a.seed,
        a.pss.into(),
        a.params.resolve(),
        a.workers,
        a.timings,
    )?;
    let problem = mssc(&a.data, a.seed)?;
    let report = run_pairwise_mssc(&spec, &problem)?;
    let paired = report
        .paired
        .as_ref()
        .ok_or_else(|| anyhow!("paired statistics missing from report"))?;

    let mut w = csv::Writer::from_writer(output(a.out_csv.as_deref())?);
    w.write_record([
        "instance",
        "phi_dca",
        "phi_bdcaplus",
        "gap",
        "iters_dca",
        "iters_bdcaplus",
        "dfo_invocations",
        "time_ratio",
    ])
    .context("writing CSV")?;
    for r in &paired.rows {
        w.write_record([
            r.instance.to_string(),
            num(r.phi_dca),
            num(r.phi_bdcaplus),
            num(r.gap),
            r.iters_dca.to_string(),
            r.iters_bdcaplus.to_string(),
            r.dfo_invocations.to_string(),
            r.time_ratio.map(num).unwrap_or_default(),
        ])
        .context("writing CSV")?;
    }
    w.flush().context("writing CSV")?;
    drop(w);

    let n = paired.rows.len();
    let gaps = paired.rows.iter().map(|r| r.gap);
    let summary = ClusterSummary {
        n_points: problem.data().len(),
        k: problem.k(),
        rho: dcboost::DcProblem::rho(&problem),
        n_starts: n,
        seed: a.seed,
        pss: spec.pss,
        win_fraction: paired.win_fraction,
        strict_improvement_fraction: gaps.clone().filter(|&g| g > STRICT_GAP).count() as f64
            / n as f64,
        worse_count: gaps.clone().filter(|&g| g < -WORSE_SLACK).count(),
        mean_gap: paired.mean_gap,
        max_gap: paired.max_gap,
        min_gap: gaps.fold(f64::INFINITY, f64::min),
        mean_time_ratio: paired.mean_time_ratio,
    };
    log::info!(
        "k={}: BDCA+ better in {:.0}% of {} pairs, mean gap {}",
        summary.k,
        100.0 * summary.win_fraction,
        n,
        summary.mean_gap
    );
    if let Some(path) = &a.out_json {
        write_json(Some(path), &summary)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn generate(a: GenerateArgs) -> CmdResult {
    let (n_blobs, per_blob) = a.blobs;
    let spec = BlobSpec {
        spread: a.spread,
        lo: a.bbox.0,
        hi: a.bbox.1,
        ..BlobSpec::planar(n_blobs, per_blob)
    };
    let data = generate_blobs(&spec, a.seed)?;
    let mut w = output(a.out.as_deref())?;
    writeln!(
        w,
        "# {n_blobs} blobs x {per_blob} points, spread {}, box [{}, {}], seed {}",
        a.spread, a.bbox.0, a.bbox.1, a.seed
    )
    .context("writing data")?;
    let mut w = csv::Writer::from_writer(w);
    for p in data.points() {
        w.write_record(p.iter().map(|&c| num(c)))
            .context("writing data")?;
    }
    w.flush().context("writing data")?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dcboost::DfoEvent;

    #[test]
    fn solve_output_round_trips() {
        let out = SolveOutput {
            algorithm: Algorithm::BdcaPlus,
            problem: "example2d".into(),
            x0: vec![0.1, -0.30000000000000004],
            final_point: vec![-1.0, -1.0],
            final_phi: -2.0000000000000004,
            termination: Termination::DStationaryCertified,
            iterations: vec![IterationRecord {
                k: 0,
                x_k: vec![0.1, 1e-300],
                y_k: vec![-1.0, -1.0],
                d_k: vec![-1.1, -1.0],
                phi_x: 1.0 / 3.0,
                phi_y: -2.0,
                lambda_k: 0.0,
                lambda_trial: 0.0,
                dfo_event: Some(DfoEvent {
                    mu_tried: vec![20.0001, 10.00005],
                    mu_accepted: None,
                    direction_index: None,
                }),
            }],
            dfo_invocations: 1,
            wall_time_s: None,
        };
        let text = serde_json::to_string_pretty(&out).unwrap();
        let back: SolveOutput = serde_json::from_str(&text).unwrap();
        assert_eq!(back, out);
    }

    #[test]
    fn error_codes() {
        let f: Failure = DcError::DimensionMismatch {
            expected: 2,
            got: 3,
        }
        .into();
        assert_eq!(f.code, EXIT_USAGE);
        let f: Failure = DcError::DescentViolation {
            iteration: 4,
            phi_y: 1.0,
            bound: 0.5,
        }
        .into();
        assert_eq!(f.code, EXIT_FAILURE);
        assert!(example2d(1.5).is_err());
        assert_eq!(example2d(0.0).unwrap().sign_at_zero, 0.0);
    }
}
