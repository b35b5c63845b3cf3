//! The Hopf solution satisfies the weak-solution properties and the
//! semigroup law; a damaged field does not.
//!
//! cargo run --release --example weak_solution

use hjlab::hj::{hopf_weak_checks, semigroup_check, HopfSolution, InitialCondition, SemigroupOptions, WeakOptions};
use hjlab::{GridSpec3, PriorSpec, Result};

fn main() -> Result<()> {
    let grid = GridSpec3::cube(1.0, 17)?;
    let axis: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    for ic in [
        InitialCondition::Spherical { alpha: 1.0 },
        InitialCondition::Iid {
            prior: PriorSpec::rademacher(),
            alpha: 1.0,
        },
    ] {
        let solution = HopfSolution::from_initial(&ic, 1.0, 1.0, 4001, 401)?;
        let mut field = solution.field(&grid)?;
        println!("{ic:?}");
        println!("  {}", hopf_weak_checks(&solution, &field, WeakOptions::default())?);
        println!("  {}", semigroup_check(&solution, 0.5, 0.5, &axis, SemigroupOptions::default())?);
        field.values[grid.index(8, 8, 8)] -= 0.1;
        let damaged = hopf_weak_checks(&solution, &field, WeakOptions::default())?;
        println!("  damaged field: {}", damaged);
    }
    Ok(())
}
