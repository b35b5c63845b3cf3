//! Finite-size free energies, Gibbs overlaps, and the identities and
//! estimates they satisfy.
pub mod decoupled;
pub mod estimators;
pub mod exact;
pub mod bounds;
pub mod mc;
pub mod mcmc;
pub mod nishimori;
pub mod overlaps;
pub mod psi;
pub mod spherical;
mod stencil;

pub use decoupled::{decoupled_mean, free_energy_quadrature_decoupled};
pub use estimators::{estimate_k, estimate_k_from_fields, estimate_l, ConcentrationEstimate};
pub use exact::{free_energy_exact, is_enumerable, Enumerator, GibbsMoments};
pub use bounds::{
    approximate_hj_residual_check, decoupled_overlap_residual, laplacian_term,
    derivative_bounds, overlap_fd_check, ResidualOptions,
};
pub use mc::{free_energy_mc, EstimateMethod, Evaluator, GibbsEstimate, ReplicaFields};
pub use mcmc::McmcParams;
pub use nishimori::{nishimori_check, NishimoriStatistic};
pub use overlaps::{gibbs_overlaps, OverlapStats, ReplicaOverlaps, Sampler};
pub use psi::{psi_iid, psi_spherical};
