//! Lax–Friedrichs time stepping for `∂ₜf = ∂₁f ∂₂f` on `[0, H]²`.
//!
//! Ghost values continue each boundary slope linearly, so one-sided
//! differences coincide at the edges and the dissipation vanishes there.
//! The scheme is monotone under `Δt (α + β) ≤ Δh`, with `α ≥ max|∂₂f|`
//! and `β ≥ max|∂₁f|` recomputed every step.

use crate::error::{Error, Result};
use crate::grid::{GridSpec3, Provenance, ScalarField3};

use super::initial::InitialCondition;

/// Slopes beyond this are reported as a blow-up.
pub const SLOPE_LIMIT: f64 = 1e6;

struct Stepper {
    n: usize,
    dh: f64,
    cfl: f64,
    f: Vec<f64>,
    next: Vec<f64>,
}

impl Stepper {
    #[inline]
    fn at(&self, i: isize, j: isize) -> f64 {
        let n = self.n as isize;
        // Linear continuation across each edge; corners combine both.
        let (ci, wi) = clamp_extend(i, n);
        let (cj, wj) = clamp_extend(j, n);
        let base = |a: usize, b: usize| self.f[a * self.n + b];
        let mut v = base(ci, cj);
        if wi != 0 {
            let inner = if ci == 0 { 1 } else { ci - 1 };
            v += wi as f64 * (base(ci, cj) - base(inner, cj));
        }
        if wj != 0 {
            let inner = if cj == 0 { 1 } else { cj - 1 };
            v += wj as f64 * (base(ci, cj) - base(ci, inner));
        }
        v
    }

    /// Largest `|D±|` along each axis.
    fn max_slopes(&self) -> (f64, f64) {
        let n = self.n;
        let mut s1 = 0.0f64;
        let mut s2 = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let v = self.f[i * n + j];
                if i + 1 < n {
                    s1 = s1.max((self.f[(i + 1) * n + j] - v).abs());
                }
                if j + 1 < n {
                    s2 = s2.max((self.f[i * n + j + 1] - v).abs());
                }
            }
        }
        (s1 / self.dh, s2 / self.dh)
    }

    /// Advances by at most `remaining`; returns the step taken.
    fn step(&mut self, remaining: f64) -> Result<f64> {
        let (s1, s2) = self.max_slopes();
        if !(s1.is_finite() && s2.is_finite()) || s1.max(s2) > SLOPE_LIMIT {
            return Err(Error::SlopeBlowUp(s1.max(s2)));
        }
        // α bounds |∂H/∂p₁| = |p₂|, β bounds |∂H/∂p₂| = |p₁|.
        let (alpha, beta) = (s2, s1);
        let speed = alpha + beta;
        let dt = if speed > 0.0 {
            (self.cfl * self.dh / speed).min(remaining)
        } else {
            remaining
        };
        if speed == 0.0 {
            return Ok(dt);
        }
        let n = self.n as isize;
        let inv = 1.0 / self.dh;
        for i in 0..n {
            for j in 0..n {
                let c = self.at(i, j);
                let p_plus = (self.at(i + 1, j) - c) * inv;
                let p_minus = (c - self.at(i - 1, j)) * inv;
                let q_plus = (self.at(i, j + 1) - c) * inv;
                let q_minus = (c - self.at(i, j - 1)) * inv;
                let p = 0.5 * (p_plus + p_minus);
                let q = 0.5 * (q_plus + q_minus);
                self.next[(i * n + j) as usize] = c
                    + dt * (p * q + 0.5 * alpha * (p_plus - p_minus) + 0.5 * beta * (q_plus - q_minus));
            }
        }
        std::mem::swap(&mut self.f, &mut self.next);
        Ok(dt)
    }
}

/// Index of the nearest grid point and how many steps beyond the edge.
#[inline]
fn clamp_extend(i: isize, n: isize) -> (usize, isize) {
    if i < 0 {
        (0, -i)
    } else if i >= n {
        ((n - 1) as usize, i - n + 1)
    } else {
        (i as usize, 0)
    }
}

/// Solves from `ψ` sampled on the `n_h × n_h` grid of `[0, h_max]²`
/// (row-major in `h₁`) and records `n_t` slices on `[0, t_max]`.
pub fn fd_solve(
    psi: &[f64],
    h_max: f64,
    n_h: usize,
    t_max: f64,
    n_t: usize,
    cfl: f64,
) -> Result<ScalarField3> {
    let grid = GridSpec3::new(t_max, h_max, n_t, n_h)?;
    if psi.len() != n_h * n_h {
        return Err(Error::DimensionMismatch {
            what: "initial samples",
            expected: n_h * n_h,
            got: psi.len(),
        });
    }
    if !(cfl > 0.0 && cfl <= 0.5) {
        return Err(Error::InvalidConfig(format!("cfl must lie in (0, 0.5], got {cfl}")));
    }
    let mut stepper = Stepper {
        n: n_h,
        dh: grid.dh(),
        cfl,
        f: psi.to_vec(),
        next: vec![0.0; psi.len()],
    };
    let mut values = Vec::with_capacity(grid.len());
    values.extend_from_slice(psi);
    let mut now = 0.0;
    let mut steps = 0usize;
    for it in 1..n_t {
        let target = grid.t(it);
        while target - now > 1e-14 * t_max {
            now += stepper.step(target - now)?;
            steps += 1;
        }
        now = target;
        values.extend_from_slice(&stepper.f);
    }
    let mut provenance = Provenance::new("lax-friedrichs");
    provenance.notes.push(format!("cfl {cfl}, {steps} steps"));
    ScalarField3::new(grid, values, vec![0.0; grid.len()], provenance)
}

/// [`fd_solve`] from a closed-form initial condition.
pub fn fd_solve_initial(
    ic: &InitialCondition,
    h_max: f64,
    n_h: usize,
    t_max: f64,
    n_t: usize,
    cfl: f64,
) -> Result<ScalarField3> {
    let dh = h_max / (n_h.max(2) - 1) as f64;
    let mut psi = Vec::with_capacity(n_h * n_h);
    for i in 0..n_h {
        for j in 0..n_h {
            psi.push(ic.value([i as f64 * dh, j as f64 * dh])?);
        }
    }
    fd_solve(&psi, h_max, n_h, t_max, n_t, cfl)
}

/// `sup |field − exact|` over grid points with every `hᵢ` in `[lo, hi]`.
pub fn sup_gap(
    field: &ScalarField3,
    lo: f64,
    hi: f64,
    exact: impl Fn(f64, [f64; 2]) -> Result<f64>,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (k, (t, h)) in field.grid.points().enumerate() {
        if h.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12) {
            worst = worst.max((field.values[k] - exact(t, h)?).abs());
        }
    }
    Ok(worst)
}

/// `sup |field − reference|` over the reference grid, whose points must
/// all be points of `field` (same spacings, nested domain).
pub fn sup_gap_against(field: &ScalarField3, reference: &ScalarField3) -> Result<f64> {
    let (g, r) = (&field.grid, &reference.grid);
    let locate = |x: f64, step: f64, len: usize| -> Result<usize> {
        let k = (x / step).round();
        if (k * step - x).abs() > 1e-9 * step.max(1.0) || k as usize >= len {
            return Err(Error::GridMismatch(format!("{x} is not a grid point")));
        }
        Ok(k as usize)
    };
    let mut worst = 0.0f64;
    for k in 0..r.len() {
        let (t, h) = r.point(k);
        let it = locate(t, g.dt(), g.n_t)?;
        let i1 = locate(h[0], g.dh(), g.n_h)?;
        let i2 = locate(h[1], g.dh(), g.n_h)?;
        worst = worst.max((field.at(it, i1, i2) - reference.values[k]).abs());
    }
    Ok(worst)
}
