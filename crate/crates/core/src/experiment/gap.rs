//! `gap(t) = ∫_{[0,H]²} |F̄_n(t,h) − f(t,h)| dh` per time slice and its
//! supremum over slices.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::ScalarField3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub t: Vec<f64>,
    pub per_slice: Vec<f64>,
    pub sup: f64,
}

/// Trapezoidal integral of `|a − b|` over each `h`-slice.
pub fn gap_functional(a: &ScalarField3, b: &ScalarField3) -> Result<GapProfile> {
    a.same_grid(b)?;
    let g = a.grid;
    let dh = g.dh();
    let weight = |i: usize| if i == 0 || i + 1 == g.n_h { 0.5 * dh } else { dh };
    let mut per_slice = Vec::with_capacity(g.n_t);
    for it in 0..g.n_t {
        let mut total = 0.0;
        for i in 0..g.n_h {
            let mut row = 0.0;
            for j in 0..g.n_h {
                row += weight(j) * (a.at(it, i, j) - b.at(it, i, j)).abs();
            }
            total += weight(i) * row;
        }
        per_slice.push(total);
    }
    let sup = per_slice.iter().cloned().fold(0.0, f64::max);
    Ok(GapProfile {
        t: g.t_axis(),
        per_slice,
        sup,
    })
}
