//! Convergence experiments: configuration, the gap functional, rate fits
//! and reports.
pub mod config;
pub mod convergence;
pub mod fit;
pub mod gap;

pub use config::{Case, ExperimentConfig};
pub use convergence::{run_convergence, Estimate, ExperimentReport, Fits, SizeRecord};
pub use fit::{fit_rate, RateFit};
pub use gap::{gap_functional, GapProfile};
