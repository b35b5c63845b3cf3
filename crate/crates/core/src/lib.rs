//! Numerical laboratory for rank-one nonsymmetric matrix inference.
//!
//! The observation is `Z = sqrt(2t/N) X Yᵀ + W` with `X ∈ ℝ^m`, `Y ∈ ℝ^n`,
//! `N = sqrt(mn)`, enriched with two decoupled Gaussian channels of strength
//! `h₁` and `h₂`. The crate provides
//!
//! - [`model`]: priors, sizes, disorder sampling and the enriched Hamiltonian;
//! - [`free_energy`]: `F_n` and `F̄_n` by enumeration, quadrature and Monte
//!   Carlo, Gibbs overlaps, identity and inequality checks, the limiting
//!   initial conditions `ψ`, and the `K`/`L` estimators;
//! - [`hj`]: the Hopf formula for `∂ₜf = ∏ᵢ ∂_{hᵢ}f` on the orthant, a
//!   Lax–Friedrichs oracle, and weak-solution property checks;
//! - [`experiment`]: the end-to-end convergence harness, rate fits and reports.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory; the
//! `hjlab` binary exposes the same pipeline from the command line.

pub mod check;
pub mod error;
pub mod experiment;
pub mod free_energy;
pub mod grid;
pub mod hj;
pub mod model;
pub mod parallel;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use check::{CheckItem, CheckReport};
pub use error::{Error, Result};
pub use grid::{GridSpec3, ScalarField3};
pub use model::{Disorder, ModelConfig, PriorSpec, SidePrior, SizeMap};
