//! Bundled DC problem instances.

mod data;
mod example2d;
mod mssc;

pub use data::{generate_blobs, load_points_csv, parse_points_csv, BlobSpec, ClusterData};
pub use example2d::{example2d_solve_subproblem, example2d_subgrad_h, Example2dProblem};
pub use mssc::{mssc_solve_subproblem, mssc_subgrad_h, MsscProblem};
