//! The averaged free energy nearly solves the limiting equation: the
//! residual bound and the sign and size estimates on its derivatives.
//!
//! cargo run --release --example derivative_estimates

use hjlab::free_energy::{
    approximate_hj_residual_check, laplacian_term, derivative_bounds, Evaluator, McmcParams, ReplicaFields,
    ResidualOptions,
};
use hjlab::{GridSpec3, ModelConfig, PriorSpec, Result};

fn main() -> Result<()> {
    let config = ModelConfig::new(4, 1.0)?;
    let grid = GridSpec3::cube(1.0, 9)?;
    let fields = ReplicaFields::compute(
        &config,
        &PriorSpec::rademacher(),
        &grid,
        400,
        3,
        &McmcParams::default(),
        Evaluator::Exact,
    )?;
    println!("mean ΔF̄/(2N) over the interior: {:.4e}", laplacian_term(&fields)?);
    let residual = approximate_hj_residual_check(&fields, ResidualOptions::default())?;
    println!("{residual}");
    if let Some(w) = residual.worst() {
        println!("    tightest: {} (lhs - rhs {:.3e}, slack {:.3e})", w.label, w.value, w.bound);
    }
    let signs = derivative_bounds(&fields, 1.0, Some(2.0))?;
    println!("{signs}");
    Ok(())
}
