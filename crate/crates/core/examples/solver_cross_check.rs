//! Hopf formula against the Lax–Friedrichs scheme under grid refinement.
//!
//! cargo run --release --example solver_cross_check

use hjlab::hj::{fd_solve_initial, sup_gap_against, HopfSolution, InitialCondition};
use hjlab::{GridSpec3, Result};

fn main() -> Result<()> {
    let ic = InitialCondition::Spherical { alpha: 1.0 };
    let solution = HopfSolution::from_initial(&ic, 1.0, 1.0, 4001, 401)?;
    let mut previous: Option<f64> = None;
    for n in [16usize, 31, 61] {
        // The finite-difference box is three times the compared region.
        let fd = fd_solve_initial(&ic, 3.0, n, 1.0, 5, 0.45)?;
        let inner = ((n - 1) / 3) + 1;
        let reference = solution.field(&GridSpec3::new(1.0, 1.0, 5, inner)?)?;
        let gap = sup_gap_against(&fd, &reference)?;
        let ratio = previous.map(|p| format!("{:.2}", p / gap)).unwrap_or_default();
        println!("dh = {:.4}  sup gap {gap:.4e}  {ratio}", fd.grid.dh());
        previous = Some(gap);
    }
    Ok(())
}
