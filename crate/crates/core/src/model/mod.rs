//! Priors, problem sizes, disorder draws and the enriched Hamiltonian.

mod config;
mod disorder;
mod hamiltonian;
mod prior;

pub use config::{ModelConfig, ModelFile, SizeMap};
pub use disorder::{sample_disorder, Disorder};
pub use hamiltonian::hamiltonian;
pub use prior::{PriorSpec, SidePrior};
pub(crate) use prior::project_to_sphere;
