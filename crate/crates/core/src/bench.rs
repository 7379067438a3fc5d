//! Multi-start experiments: basin-of-attraction counts on the planar example
//! and paired DCA vs. BDCA+ comparisons on clustering instances.
//!
//! Every start draws from its own ChaCha stream `(seed, start_index)`, and
//! per-start results are collected in start order, so a report does not
//! depend on how many worker threads produced it.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dc::{DcProblem, RunResult, SolverParams, Termination};
use crate::error::DcError;
use crate::linalg::dist;
use crate::problems::{Example2dProblem, MsscProblem};
use crate::solvers::{run_bdca, run_bdca_plus, run_dca};
use crate::spanning::PssKind;
use crate::Point;

pub const UNCLASSIFIED: &str = "unclassified";
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-3;
/// A paired start counts as a BDCA+ win when its objective is lower by more
/// than this.
pub const WIN_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "dca")]
    Dca,
    #[serde(rename = "bdca")]
    Bdca,
    #[serde(rename = "bdca+")]
    BdcaPlus,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dca => "dca",
            Algorithm::Bdca => "bdca",
            Algorithm::BdcaPlus => "bdca+",
        }
    }

    pub fn run<P: DcProblem + ?Sized>(
        self,
        problem: &P,
        x0: &[f64],
        pss_kind: PssKind,
        params: &SolverParams,
    ) -> Result<RunResult, DcError> {
        match self {
            Algorithm::Dca => run_dca(problem, x0, params),
            Algorithm::Bdca => run_bdca(problem, x0, params),
            Algorithm::BdcaPlus => {
                let pss = pss_kind.build(problem.dim())?;
                run_bdca_plus(problem, x0, &pss, params)
            }
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = DcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dca" => Ok(Algorithm::Dca),
            "bdca" => Ok(Algorithm::Bdca),
            "bdca+" | "bdcaplus" | "bdca-plus" => Ok(Algorithm::BdcaPlus),
            other => Err(DcError::InvalidInput(format!(
                "unknown algorithm '{other}'"
            ))),
        }
    }
}

/// Settings shared by all multi-start experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n_starts: usize,
    pub seed: u64,
    pub pss: PssKind,
    pub params: SolverParams,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// When false all wall times are omitted, making reports bitwise
    /// reproducible.
    pub record_timings: bool,
}

impl ExperimentSpec {
    pub fn new(n_starts: usize, seed: u64) -> Self {
        Self {
            n_starts,
            seed,
            pss: PssKind::D1,
            params: SolverParams::default(),
            workers: None,
            record_timings: false,
        }
    }
}

/// Random stream for one start, independent of every other start.
pub fn start_rng(seed: u64, start_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start_index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub start: Point,
    pub final_point: Point,
    pub final_phi: f64,
    pub iterations: usize,
    pub dfo_invocations: usize,
    pub termination: Termination,
    pub wall_time: Option<f64>,
}

impl RunSummary {
    fn from_run(start: &[f64], run: &RunResult, record_timings: bool) -> Self {
        Self {
            start: start.to_vec(),
            final_point: run.final_point.clone(),
            final_phi: run.final_phi,
            iterations: run.iterations.len(),
            dfo_invocations: run.dfo_invocations,
            termination: run.termination,
            wall_time: record_timings.then_some(run.wall_time),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRuns {
    pub algorithm: Algorithm,
    pub runs: Vec<RunSummary>,
    /// Label → count; present for problems with known reference points.
    pub basin_counts: Option<BTreeMap<String, usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRow {
    pub instance: usize,
    pub phi_dca: f64,
    pub phi_bdcaplus: f64,
    /// `phi_dca − phi_bdcaplus`
    pub gap: f64,
    pub iters_dca: usize,
    pub iters_bdcaplus: usize,
    pub dfo_invocations: usize,
    /// `time(DCA) / time(BDCA+)`
    pub time_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedStats {
    /// Sorted by gap, largest first.
    pub rows: Vec<PairedRow>,
    /// Fraction of starts with `phi_bdcaplus < phi_dca − 1e-9`.
    pub win_fraction: f64,
    pub mean_gap: f64,
    pub max_gap: f64,
    pub mean_time_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStartReport {
    pub problem: String,
    pub seed: u64,
    pub n_starts: usize,
    pub pss: PssKind,
    /// Basin labels in display order (empty when not classified).
    pub labels: Vec<String>,
    pub algorithms: Vec<AlgorithmRuns>,
    pub paired: Option<PairedStats>,
}

impl MultiStartReport {
    pub fn runs_for(&self, algorithm: Algorithm) -> Option<&AlgorithmRuns> {
        self.algorithms.iter().find(|a| a.algorithm == algorithm)
    }

    pub fn count(&self, algorithm: Algorithm, label: &str) -> usize {
        self.runs_for(algorithm)
            .and_then(|a| a.basin_counts.as_ref())
            .and_then(|c| c.get(label).copied())
            .unwrap_or(0)
    }
}

/// Label of the unique reference within `tol` of `x`, or
/// [`UNCLASSIFIED`]. Two references within `tol` is a configuration error.
pub fn classify_limit_point(
    x: &[f64],
    references: &[(String, Point)],
    tol: f64,
) -> Result<String, DcError> {
    if !(tol > 0.0) {
        return Err(DcError::InvalidParams(
            "classification tolerance must be positive".into(),
        ));
    }
    let mut hit: Option<&str> = None;
    for (label, p) in references {
        if dist(x, p) <= tol {
            if let Some(first) = hit {
                return Err(DcError::AmbiguousClassification {
                    first: first.to_string(),
                    second: label.clone(),
                });
            }
            hit = Some(label);
        }
    }
    Ok(hit.unwrap_or(UNCLASSIFIED).to_string())
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, DcError> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| DcError::InvalidParams(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Uniform starts in `[−1.5, 1.5]²`; DCA, BDCA and BDCA+ from each; limit
/// points classified against the four critical points.
pub fn run_table1(
    spec: &ExperimentSpec,
    problem: &Example2dProblem,
) -> Result<MultiStartReport, DcError> {
    if spec.n_starts == 0 {
        return Err(DcError::InvalidParams("n_starts must be at least 1".into()));
    }
    let algorithms = [Algorithm::Dca, Algorithm::Bdca, Algorithm::BdcaPlus];
    let references = Example2dProblem::critical_points();
    let labels: Vec<String> = references.iter().map(|(l, _)| l.clone()).collect();
    let pss = spec.pss.build(2)?;

    let per_start: Vec<Result<[(RunSummary, String); 3], DcError>> = in_pool(spec.workers, || {
        (0..spec.n_starts)
            .into_par_iter()
            .map(|i| {
                let mut rng = start_rng(spec.seed, i);
                let x0 = [rng.random_range(-1.5..=1.5), rng.random_range(-1.5..=1.5)];
                let one = |alg: Algorithm| -> Result<(RunSummary, String), DcError> {
                    let run = match alg {
                        Algorithm::Dca => run_dca(problem, &x0, &spec.params)?,
                        Algorithm::Bdca => run_bdca(problem, &x0, &spec.params)?,
                        Algorithm::BdcaPlus => run_bdca_plus(problem, &x0, &pss, &spec.params)?,
                    };
                    let label =
                        classify_limit_point(&run.final_point, &references, DEFAULT_CLASSIFY_TOL)?;
                    Ok((RunSummary::from_run(&x0, &run, spec.record_timings), label))
                };
                Ok([
                    one(algorithms[0])?,
                    one(algorithms[1])?,
                    one(algorithms[2])?,
                ])
            })
            .collect()
    })?;

    let mut columns: Vec<AlgorithmRuns> = algorithms
        .iter()
        .map(|&algorithm| {
            let mut counts: BTreeMap<String, usize> =
                labels.iter().map(|l| (l.clone(), 0)).collect();
            counts.insert(UNCLASSIFIED.to_string(), 0);
            AlgorithmRuns {
                algorithm,
                runs: Vec::with_capacity(spec.n_starts),
                basin_counts: Some(counts),
            }
        })
        .collect();
    for result in per_start {
        for (column, (summary, label)) in columns.iter_mut().zip(result?) {
            *column
                .basin_counts
                .as_mut()
                .expect("initialized above")
                .entry(label)
                .or_insert(0) += 1;
            column.runs.push(summary);
        }
    }

    Ok(MultiStartReport {
        problem: "example2d".into(),
        seed: spec.seed,
        n_starts: spec.n_starts,
        pss: spec.pss,
        labels,
        algorithms: columns,
        paired: None,
    })
}

/// DCA and BDCA+ from the same random centroid configurations.
pub fn run_pairwise_mssc(
    spec: &ExperimentSpec,
    problem: &MsscProblem,
) -> Result<MultiStartReport, DcError> {
    if spec.n_starts == 0 {
        return Err(DcError::InvalidParams("n_starts must be at least 1".into()));
    }
    let pss = spec.pss.build(problem.dim())?;

    let pairs: Vec<Result<(RunSummary, RunSummary), DcError>> = in_pool(spec.workers, || {
        (0..spec.n_starts)
            .into_par_iter()
            .map(|i| {
                let mut rng = start_rng(spec.seed, i);
                let x0 = problem.random_start(&mut rng);
                let dca = run_dca(problem, &x0, &spec.params)?;
                let plus = run_bdca_plus(problem, &x0, &pss, &spec.params)?;
                Ok((
                    RunSummary::from_run(&x0, &dca, spec.record_timings),
                    RunSummary::from_run(&x0, &plus, spec.record_timings),
                ))
            })
            .collect()
    })?;

    let mut dca_runs = Vec::with_capacity(spec.n_starts);
    let mut plus_runs = Vec::with_capacity(spec.n_starts);
    for pair in pairs {
        let (a, b) = pair?;
        dca_runs.push(a);
        plus_runs.push(b);
    }

    let mut rows: Vec<PairedRow> = dca_runs
        .iter()
        .zip(&plus_runs)
        .enumerate()
        .map(|(instance, (a, b))| PairedRow {
            instance,
            phi_dca: a.final_phi,
            phi_bdcaplus: b.final_phi,
            gap: a.final_phi - b.final_phi,
            iters_dca: a.iterations,
            iters_bdcaplus: b.iterations,
            dfo_invocations: b.dfo_invocations,
            time_ratio: match (a.wall_time, b.wall_time) {
                (Some(ta), Some(tb)) if tb > 0.0 => Some(ta / tb),
                _ => None,
            },
        })
        .collect();
    rows.sort_by(|a, b| b.gap.total_cmp(&a.gap).then(a.instance.cmp(&b.instance)));

    let n = rows.len() as f64;
    let wins = rows
        .iter()
        .filter(|r| r.phi_bdcaplus < r.phi_dca - WIN_MARGIN)
        .count();
    let mean_gap = rows.iter().map(|r| r.gap).sum::<f64>() / n;
    let max_gap = rows.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max);
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.time_ratio).collect();
    let mean_time_ratio =
        (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);

    Ok(MultiStartReport {
        problem: format!("mssc(k={})", problem.k()),
        seed: spec.seed,
        n_starts: spec.n_starts,
        pss: spec.pss,
        labels: Vec::new(),
        algorithms: vec![
            AlgorithmRuns {
                algorithm: Algorithm::Dca,
                runs: dca_runs,
                basin_counts: None,
            },
            AlgorithmRuns {
                algorithm: Algorithm::BdcaPlus,
                runs: plus_runs,
                basin_counts: None,
            },
        ],
        paired: Some(PairedStats {
            rows,
            win_fraction: wins as f64 / n,
            mean_gap,
            max_gap,
            mean_time_ratio,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{generate_blobs, BlobSpec, ClusterData};

    #[test]
    fn classify_examples() {
        let refs = Example2dProblem::critical_points();
        assert_eq!(
            classify_limit_point(&[-0.9997, -1.0002], &refs, 1e-3).unwrap(),
            "(-1,-1)"
        );
        assert_eq!(
            classify_limit_point(&[-0.5, -0.5], &refs, 1e-3).unwrap(),
            UNCLASSIFIED
        );
        let dupes = vec![
            ("a".to_string(), vec![0.0, 0.0]),
            ("b".to_string(), vec![0.0, 1e-4]),
        ];
        assert!(matches!(
            classify_limit_point(&[0.0, 0.0], &dupes, 1e-3),
            Err(DcError::AmbiguousClassification { .. })
        ));
    }

    #[test]
    fn table1_small_counts_sum() {
        let spec = ExperimentSpec::new(1, 0);
        let r = run_table1(&spec, &Example2dProblem::default()).unwrap();
        for alg in &r.algorithms {
            let total: usize = alg.basin_counts.as_ref().unwrap().values().sum();
            assert_eq!(total, 1);
            assert_eq!(alg.runs.len(), 1);
        }
    }

    #[test]
    fn table1_independent_of_workers() {
        let mut spec = ExperimentSpec::new(200, 17);
        spec.workers = Some(1);
        let a = run_table1(&spec, &Example2dProblem::default()).unwrap();
        spec.workers = Some(4);
        let b = run_table1(&spec, &Example2dProblem::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count(Algorithm::BdcaPlus, "(-1,-1)"), 200);
    }

    #[test]
    fn single_cluster_reaches_mean() {
        let data = generate_blobs(&BlobSpec::planar(2, 30), 4).unwrap();
        let mean = data.mean().to_vec();
        let problem = MsscProblem::new(data, 1).unwrap();
        let r = run_pairwise_mssc(&ExperimentSpec::new(5, 1), &problem).unwrap();
        let paired = r.paired.unwrap();
        for row in &paired.rows {
            assert!(row.gap.abs() <= 1e-12, "{row:?}");
        }
        for alg in &r.algorithms {
            for run in &alg.runs {
                assert!(dist(&run.final_point, &mean) < 1e-6);
            }
        }
    }

    #[test]
    fn pairwise_rows_sorted_and_never_worse() {
        let data: ClusterData = generate_blobs(&BlobSpec::planar(3, 50), 8).unwrap();
        let problem = MsscProblem::new(data, 3).unwrap();
        let spec = ExperimentSpec::new(6, 2);
        let r = run_pairwise_mssc(&spec, &problem).unwrap();
        let rows = &r.paired.as_ref().unwrap().rows;
        assert_eq!(rows.len(), 6);
        for w in rows.windows(2) {
            assert!(w[0].gap >= w[1].gap);
        }
        for row in rows {
            assert!(row.phi_bdcaplus <= row.phi_dca + 1e-12);
            assert!(row.time_ratio.is_none());
        }
        assert_eq!(r, run_pairwise_mssc(&spec, &problem).unwrap());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for alg in [Algorithm::Dca, Algorithm::Bdca, Algorithm::BdcaPlus] {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
    }
}
