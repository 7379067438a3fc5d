//! DCA, BDCA and BDCA+ drivers together with their building blocks.

mod direct_search;
mod drivers;
mod line_search;
mod stationarity;
mod step;

pub use direct_search::{dfo_escape, DfoOutcome, DfoState, DFO_NOISE_REL};
pub use drivers::{run_bdca, run_bdca_plus, run_dca};
pub use line_search::{
    armijo_backtrack, armijo_search, next_trial_step, LineSearchResult, SelfAdaptiveState,
    LAMBDA_FLOOR, MAX_BACKTRACKS,
};
pub use stationarity::{check_d_stationarity, directional_derivative, StationarityReport};
pub use step::{check_descent, dca_step, DcaStep};

#[cfg(test)]
mod tests;
