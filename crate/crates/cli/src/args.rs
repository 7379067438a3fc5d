use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dcboost::{PssKind, SolverParams, TrialStepRule};

#[derive(Debug, Parser)]
#[command(
    name = "dcboost",
    version,
    about = "DCA, BDCA and BDCA+ for difference-of-convex programs"
)]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver from one starting point.
    Solve(SolveArgs),
    /// Test d-stationarity of a point against a positive spanning set.
    Check(CheckArgs),
    /// Basin-of-attraction counts on the planar example.
    Table1(Table1Args),
    /// Paired DCA vs. BDCA+ runs on a clustering instance.
    Cluster(ClusterArgs),
    /// Write synthetic blob data as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    Example2d,
    Mssc,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Example2d => "example2d",
            ProblemKind::Mssc => "mssc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Dca,
    Bdca,
    #[value(name = "bdca+", alias = "bdcaplus")]
    BdcaPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PssArg {
    D1,
    D2,
    D3,
}

impl From<PssArg> for PssKind {
    fn from(p: PssArg) -> Self {
        match p {
            PssArg::D1 => PssKind::D1,
            PssArg::D2 => PssKind::D2,
            PssArg::D3 => PssKind::D3,
        }
    }
}

/// Overrides for the solver constants; unset flags keep the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub eps2: Option<f64>,
    #[arg(long)]
    pub mu_bar: Option<f64>,
    /// Default 1/beta2.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Default eps2.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda_bar1: Option<f64>,
    /// `adaptive`, or a fixed nonnegative trial step (0 disables boosting).
    #[arg(long, value_parser = parse_trial_rule)]
    pub trial_step: Option<TrialStepRule>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl ParamArgs {
    pub fn resolve(&self) -> SolverParams {
        let mut p = SolverParams::default();
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        set!(
            alpha,
            beta1,
            beta2,
            eps1,
            eps2,
            mu_bar,
            gamma,
            lambda_bar1,
            max_iter
        );
        p.eta = self.eta.unwrap_or(1.0 / p.beta2);
        p.tau = self.tau.unwrap_or(p.eps2);
        if let Some(rule) = self.trial_step {
            p.trial_rule = rule;
        }
        p
    }
}

fn parse_trial_rule(s: &str) -> Result<TrialStepRule, String> {
    if s.eq_ignore_ascii_case("adaptive") {
        return Ok(TrialStepRule::SelfAdaptive);
    }
    s.parse::<f64>()
        .map(TrialStepRule::Fixed)
        .map_err(|_| format!("expected 'adaptive' or a number, got '{s}'"))
}

/// Comma-separated coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

fn parse_point(s: &str) -> Result<Coords, String> {
    parse_coords(s).map(Coords)
}

pub fn parse_coords(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{c}' is not a number"))
        })
        .collect()
}

/// `NxP`: N blobs of P points each.
pub fn parse_blobs(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxP, got '{s}'"))?;
    let n = a
        .trim()
        .parse()
        .map_err(|_| format!("bad blob count '{a}'"))?;
    let p = b
        .trim()
        .parse()
        .map_err(|_| format!("bad points per blob '{b}'"))?;
    if n == 0 || p == 0 {
        return Err("blob counts must be positive".into());
    }
    Ok((n, p))
}

fn parse_box(s: &str) -> Result<(f64, f64), String> {
    let v = parse_coords(s)?;
    match v[..] {
        [lo, hi] if lo <= hi => Ok((lo, hi)),
        _ => Err(format!("expected LO,HI with LO <= HI, got '{s}'")),
    }
}

/// Where clustering data comes from.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file of points, one `x,y` per line.
    #[arg(long, conflicts_with = "blobs")]
    pub data: Option<PathBuf>,
    /// Synthetic Gaussian blobs, `NxP` (N blobs of P points).
    #[arg(long, value_parser = parse_blobs)]
    pub blobs: Option<(usize, usize)>,
    /// Standard deviation of each blob.
    #[arg(long, default_value_t = 0.5)]
    pub spread: f64,
    /// Blob centers are drawn from this interval in every coordinate.
    #[arg(long = "box", value_parser = parse_box, default_value = "0,10")]
    pub bbox: (f64, f64),
    /// Seed for the blob generator (defaults to the run seed).
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Number of centroids.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Strong convexity parameter (default 1/(n·k)).
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemKind,
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    /// Starting point; drawn from the seed when omitted.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub x0: Option<Coords>,
    #[arg(long, env = "DCBOOST_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "d1")]
    pub pss: PssArg,
    /// sign(0) used when selecting a subgradient of |·| (example2d).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sign_at_zero: f64,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// JSON output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration CSV for plotting.
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,
    /// Include wall-clock times (makes output non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemKind,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub point: Coords,
    #[arg(long, value_enum, default_value = "d1")]
    pub pss: PssArg,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Forward-difference step when no exact h′ is available.
    #[arg(long, default_value_t = 1e-7)]
    pub fd_step: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sign_at_zero: f64,
    #[arg(long, env = "DCBOOST_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long, default_value_t = 10_000)]
    pub starts: usize,
    #[arg(long, env = "DCBOOST_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "d1")]
    pub pss: PssArg,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sign_at_zero: f64,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Count matrix CSV (stdout when omitted).
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Full report JSON.
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 50)]
    pub starts: usize,
    #[arg(long, env = "DCBOOST_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "d1")]
    pub pss: PssArg,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Per-instance CSV (stdout when omitted).
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = parse_blobs)]
    pub blobs: (usize, usize),
    #[arg(long, default_value_t = 0.5)]
    pub spread: f64,
    #[arg(long = "box", value_parser = parse_box, default_value = "0,10")]
    pub bbox: (f64, f64),
    #[arg(long, env = "DCBOOST_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_and_blobs() {
        assert_eq!(parse_coords("-1,-1").unwrap(), vec![-1.0, -1.0]);
        assert!(parse_coords("1,a").is_err());
        assert_eq!(parse_blobs("4x200").unwrap(), (4, 200));
        assert!(parse_blobs("4by200").is_err());
        assert!(parse_blobs("0x10").is_err());
        assert_eq!(parse_box("0,10").unwrap(), (0.0, 10.0));
        assert!(parse_box("3,1").is_err());
    }

    #[test]
    fn param_overrides() {
        let args = ParamArgs {
            beta2: Some(0.25),
            trial_step: Some(TrialStepRule::Fixed(0.0)),
            ..ParamArgs::default()
        };
        let p = args.resolve();
        assert_eq!(p.eta, 4.0);
        assert_eq!(p.tau, 1e-4);
        assert_eq!(p.trial_rule, TrialStepRule::Fixed(0.0));
        assert_eq!(ParamArgs::default().resolve(), SolverParams::default());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
