//! Solving ∂ₜf = ∂₁f ∂₂f with the Hopf formula, from closed-form and
//! sampled initial data.
//!
//! cargo run --release --example hopf_formula

use hjlab::hj::{fenchel_moreau_check, hopf_solve, ConvexFn1D, HopfSolution, InitialCondition, Tail};
use hjlab::{GridSpec3, Result};

fn main() -> Result<()> {
    let plane = [
        ConvexFn1D::from_fn(6.0, 61, Tail::Linear, |y| 0.3 * y)?,
        ConvexFn1D::from_fn(6.0, 61, Tail::Linear, |y| 0.7 * y)?,
    ];
    println!("plane wave at t=2, h=(1,1): {:.10}", hopf_solve(&plane, 2.0, &[1.0, 1.0])?);

    let kinked = ConvexFn1D::new(2.0, vec![0.0, 0.0, 0.25, 1.0, 2.0], Tail::Linear)?;
    println!("{}", fenchel_moreau_check(&kinked, 201));

    let ic = InitialCondition::Spherical { alpha: 1.0 };
    let solution = HopfSolution::from_initial(&ic, 1.0, 1.0, 4001, 401)?;
    let field = solution.field(&GridSpec3::cube(1.0, 5)?)?;
    println!("spherical data, Lipschitz bound {:.4}", solution.lipschitz_bound());
    for it in 0..field.grid.n_t {
        let row: Vec<String> = (0..field.grid.n_h).map(|i| format!("{:.5}", field.at(it, i, i))).collect();
        println!("t = {:.2}: f(t, h, h) = {}", field.grid.t(it), row.join("  "));
    }
    Ok(())
}
