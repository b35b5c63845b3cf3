//! Hamilton–Jacobi equation `∂ₜf = ∏ᵢ ∂_{hᵢ}f` on the orthant.
pub mod convex;
pub mod fd;
pub mod hopf;
pub mod initial;
pub mod weak;

pub use convex::{conjugate_1d, fenchel_moreau_check, Conjugate1D, ConvexFn1D, Tail};
pub use hopf::{hopf_field, hopf_solve, HopfSolution};
pub use initial::InitialCondition;
pub use fd::{fd_solve, fd_solve_initial, sup_gap, sup_gap_against};
pub use weak::{hopf_weak_checks, semigroup_check, weak_solution_checks, SemigroupOptions, WeakOptions};
