//! Finite-difference stencils on [`GridSpec3`] fields.
//!
//! Axis 0 is `t`, axes 1 and 2 are `h₁` and `h₂`.

use crate::grid::GridSpec3;

/// A linear combination `Σ cₖ f[iₖ]`.
pub(crate) type Stencil = Vec<(usize, f64)>;

pub(crate) fn spacing(grid: &GridSpec3, axis: usize) -> f64 {
    if axis == 0 {
        grid.dt()
    } else {
        grid.dh()
    }
}

pub(crate) fn axis_len(grid: &GridSpec3, axis: usize) -> usize {
    if axis == 0 {
        grid.n_t
    } else {
        grid.n_h
    }
}

/// Index of `p` moved by `offset` along `axis`, if inside the grid.
pub(crate) fn shift(grid: &GridSpec3, p: [usize; 3], axis: usize, offset: isize) -> Option<usize> {
    let mut q = p;
    let moved = q[axis] as isize + offset;
    if moved < 0 || moved as usize >= axis_len(grid, axis) {
        return None;
    }
    q[axis] = moved as usize;
    Some(grid.index(q[0], q[1], q[2]))
}

pub(crate) fn apply(stencil: &[(usize, f64)], values: &[f64]) -> f64 {
    stencil.iter().map(|&(i, c)| c * values[i]).sum()
}

/// Central first derivative (requires an interior point along `axis`).
pub(crate) fn central_d1(grid: &GridSpec3, p: [usize; 3], axis: usize) -> Option<Stencil> {
    let d = spacing(grid, axis);
    Some(vec![
        (shift(grid, p, axis, 1)?, 0.5 / d),
        (shift(grid, p, axis, -1)?, -0.5 / d),
    ])
}

/// Forward difference `(f(p + e) − f(p))/δ`.
pub(crate) fn forward_d1(grid: &GridSpec3, p: [usize; 3], axis: usize) -> Option<Stencil> {
    let d = spacing(grid, axis);
    Some(vec![(shift(grid, p, axis, 1)?, 1.0 / d), (shift(grid, p, axis, 0)?, -1.0 / d)])
}

/// Central second difference divided by `δ²`.
pub(crate) fn central_d2(grid: &GridSpec3, p: [usize; 3], axis: usize) -> Option<Stencil> {
    let d = spacing(grid, axis);
    let c = 1.0 / (d * d);
    Some(vec![
        (shift(grid, p, axis, 1)?, c),
        (shift(grid, p, axis, 0)?, -2.0 * c),
        (shift(grid, p, axis, -1)?, c),
    ])
}

/// Forward mixed difference in `(h₁, h₂)` divided by `δ²`.
pub(crate) fn forward_mixed(grid: &GridSpec3, p: [usize; 3]) -> Option<Stencil> {
    let d = grid.dh();
    let c = 1.0 / (d * d);
    let up1 = shift(grid, p, 1, 1)?;
    let up2 = shift(grid, p, 2, 1)?;
    let mut q = p;
    q[1] += 1;
    let both = shift(grid, q, 2, 1)?;
    Some(vec![(both, c), (up1, -c), (up2, -c), (grid.index(p[0], p[1], p[2]), c)])
}

/// `max |Δᵏ f| / δᵏ` over all positions along `axis`: an estimate of
/// `sup |∂ᵏf|` used to bound truncation errors.
pub(crate) fn max_derivative(grid: &GridSpec3, values: &[f64], axis: usize, order: usize) -> f64 {
    let len = axis_len(grid, axis);
    if len <= order {
        return 0.0;
    }
    let d = spacing(grid, axis);
    let binom: Vec<f64> = (0..=order)
        .map(|j| {
            let mut c = 1.0;
            for i in 0..j {
                c = c * (order - i) as f64 / (i + 1) as f64;
            }
            if (order - j) % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    let mut worst = 0.0f64;
    for k in 0..grid.len() {
        let (it, i1, i2) = grid.unindex(k);
        let p = [it, i1, i2];
        if p[axis] + order >= len {
            continue;
        }
        let mut acc = 0.0;
        for (j, &c) in binom.iter().enumerate() {
            acc += c * values[shift(grid, p, axis, j as isize).unwrap()];
        }
        worst = worst.max(acc.abs());
    }
    worst / d.powi(order as i32)
}

/// Interior points with at least one neighbour on each side along every axis.
pub(crate) fn interior_points(grid: &GridSpec3) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for it in 1..grid.n_t.saturating_sub(1) {
        for i1 in 1..grid.n_h.saturating_sub(1) {
            for i2 in 1..grid.n_h.saturating_sub(1) {
                out.push([it, i1, i2]);
            }
        }
    }
    out
}
