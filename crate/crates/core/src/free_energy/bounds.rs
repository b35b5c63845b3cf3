//! Finite-difference checks of the derivative identities and estimates
//! satisfied by `F̄_n`, evaluated on stored per-replica fields.

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::model::{sample_disorder, ModelConfig, PriorSpec};
use crate::parallel::try_map_indexed;
use crate::rng::replica_seed;
use crate::stats::{column_mean_se, mean_se};

use super::exact::Enumerator;
use super::mc::ReplicaFields;
use super::overlaps::{replica_overlaps, OverlapStats, Sampler};
use super::stencil::{
    apply, central_d1, central_d2, forward_d1, forward_mixed, interior_points, max_derivative,
    Stencil,
};

/// Standard errors allowed on statistically estimated quantities.
pub const SIGMAS: f64 = 4.0;

/// Minimum number of interior points per axis for the residual check.
pub const MIN_INTERIOR: usize = 5;

/// Mean and standard error of a stencil applied to every replica.
fn stencil_stat(fields: &ReplicaFields, stencil: &Stencil) -> (f64, f64) {
    let v: Vec<f64> = fields.fields.iter().map(|f| apply(stencil, f)).collect();
    mean_se(&v)
}

/// Options for [`approximate_hj_residual_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions {
    /// Multiplier on the finite-difference truncation bound.
    pub truncation_factor: f64,
    /// Multiplier on the replica standard error of the residual.
    pub sigmas: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        ResidualOptions {
            truncation_factor: 5.0,
            sigmas: SIGMAS,
        }
    }
}

/// Checks `|∂ₜF̄ − ∂₁F̄ ∂₂F̄| ≤ ΔF̄/(2N) + ½ E|∇(F_n − F̄)|²` at every interior
/// point, derivatives by central differences.
///
/// The slack is `truncation_factor` times a truncation bound built from
/// third and fourth differences of the fields, plus `sigmas` replica
/// standard errors of the left side (linearized around the mean).
pub fn approximate_hj_residual_check(
    fields: &ReplicaFields,
    options: ResidualOptions,
) -> Result<CheckReport> {
    let grid = fields.grid;
    let inner = grid.n_t.min(grid.n_h).saturating_sub(2);
    if inner < MIN_INTERIOR {
        return Err(Error::GridTooCoarse(format!(
            "{inner} interior points per axis, need at least {MIN_INTERIOR}"
        )));
    }
    if fields.n_replicas() < 2 {
        return Err(Error::InvalidConfig("need at least two disorder replicas".into()));
    }
    let big_n = fields.config.big_n();
    let (mean, _) = column_mean_se(&fields.fields);
    let (dt, dh) = (grid.dt(), grid.dh());

    // sup |∂³| and sup |∂⁴| along each axis, for the mean and for deviations.
    let m3: Vec<f64> = (0..3).map(|a| max_derivative(&grid, &mean, a, 3)).collect();
    let m4: Vec<f64> = (1..3).map(|a| max_derivative(&grid, &mean, a, 4)).collect();
    let mut m3_dev = [0.0f64; 3];
    for f in &fields.fields {
        let dev: Vec<f64> = f.iter().zip(&mean).map(|(a, b)| a - b).collect();
        for (a, slot) in m3_dev.iter_mut().enumerate().skip(1) {
            *slot = slot.max(max_derivative(&grid, &dev, a, 3));
        }
    }
    let e_t = dt * dt / 6.0 * m3[0];
    let e1 = dh * dh / 6.0 * m3[1];
    let e2 = dh * dh / 6.0 * m3[2];
    let e_lap = dh * dh / 12.0 * (m4[0] + m4[1]);
    let (ed1, ed2) = (dh * dh / 6.0 * m3_dev[1], dh * dh / 6.0 * m3_dev[2]);

    let mut report = CheckReport::new("approximate Hamilton-Jacobi residual");
    report.note(format!(
        "{} replicas, N = {big_n}, truncation bounds: t {e_t:.2e}, h1 {e1:.2e}, h2 {e2:.2e}, laplacian {e_lap:.2e}",
        fields.n_replicas()
    ));
    let r = fields.n_replicas() as f64;
    for p in interior_points(&grid) {
        let st = central_d1(&grid, p, 0).unwrap();
        let s1 = central_d1(&grid, p, 1).unwrap();
        let s2 = central_d1(&grid, p, 2).unwrap();
        let (ft, f1, f2) = (apply(&st, &mean), apply(&s1, &mean), apply(&s2, &mean));
        let lap = apply(&central_d2(&grid, p, 1).unwrap(), &mean)
            + apply(&central_d2(&grid, p, 2).unwrap(), &mean);
        let mut conc = 0.0;
        let mut conc_trunc = 0.0;
        let mut linear = Vec::with_capacity(fields.n_replicas());
        for f in &fields.fields {
            let (g1, g2) = (apply(&s1, f) - f1, apply(&s2, f) - f2);
            conc += g1 * g1 + g2 * g2;
            conc_trunc += 2.0 * (g1.abs() * ed1 + g2.abs() * ed2) + ed1 * ed1 + ed2 * ed2;
            linear.push(apply(&st, f) - f2 * apply(&s1, f) - f1 * apply(&s2, f));
        }
        conc /= r;
        conc_trunc /= r;
        let (_, se) = mean_se(&linear);
        let lhs = (ft - f1 * f2).abs();
        let rhs = lap / (2.0 * big_n) + 0.5 * conc;
        let truncation =
            e_t + f2.abs() * e1 + f1.abs() * e2 + e1 * e2 + e_lap / (2.0 * big_n) + 0.5 * conc_trunc;
        let slack = options.truncation_factor * truncation + options.sigmas * se;
        let (t, h) = (grid.t(p[0]), [grid.h(p[1]), grid.h(p[2])]);
        report.at_most(
            format!("t={t:.3} h=({:.3},{:.3}) |dt - d1 d2| - rhs", h[0], h[1]),
            lhs - rhs,
            slack,
        );
    }
    Ok(report)
}

/// Mean over interior points of `ΔF̄/(2N)`, the Laplacian term on the right
/// of the residual bound.
pub fn laplacian_term(fields: &ReplicaFields) -> Result<f64> {
    let grid = fields.grid;
    let points = interior_points(&grid);
    if points.is_empty() {
        return Err(Error::GridTooCoarse("no interior points".into()));
    }
    let (mean, _) = column_mean_se(&fields.fields);
    let total: f64 = points
        .iter()
        .map(|&p| {
            apply(&central_d2(&grid, p, 1).unwrap(), &mean)
                + apply(&central_d2(&grid, p, 2).unwrap(), &mean)
        })
        .sum();
    Ok(total / points.len() as f64 / (2.0 * fields.config.big_n()))
}

/// `|qxy − qx·qy|` at `t = 0` for interior `h` grid points, which the
/// residual reduces to when the Gibbs measure decouples. Only available when
/// Gibbs averages can be enumerated.
pub fn decoupled_overlap_residual(
    config: &ModelConfig,
    prior: &PriorSpec,
    h_axis: &[f64],
    n_disorder: usize,
    seed: u64,
    sigmas: f64,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("t = 0 overlap residual");
    let big_n = config.big_n();
    for (i, &h1) in h_axis.iter().enumerate() {
        for &h2 in &h_axis[i..] {
            let h = [h1, h2];
            let reps = replica_overlaps(config, prior, 0.0, h, n_disorder, seed, &Sampler::Exact)?;
            let s = OverlapStats::from_replicas(&reps, big_n);
            let lin: Vec<f64> = reps
                .iter()
                .map(|r| (r.xxyy / big_n - s.qy * r.xx - s.qx * r.yy) / big_n)
                .collect();
            let (_, se) = mean_se(&lin);
            report.at_most(
                format!("h=({h1:.3},{h2:.3}) |qxy - qx qy|"),
                (s.qxy - s.qx * s.qy).abs(),
                sigmas * se + 1e-12,
            );
        }
    }
    Ok(report)
}

/// Derivative bounds, signs, and growth of `F̄_n` on a grid `[0, M]³`.
///
/// `m_bound` is `M`; the derivative bound is `C = 2 + 2M`. `grad_bound`
/// optionally adds `|∇F̄| ≤ grad_bound`. Sign checks allow `SIGMAS` replica
/// standard errors of each stencil.
pub fn derivative_bounds(
    fields: &ReplicaFields,
    m_bound: f64,
    grad_bound: Option<f64>,
) -> Result<CheckReport> {
    if fields.n_replicas() < 2 {
        return Err(Error::InvalidConfig("need at least two disorder replicas".into()));
    }
    let grid = fields.grid;
    let c = 2.0 + 2.0 * m_bound;
    let (mean, _) = column_mean_se(&fields.fields);
    let mut report = CheckReport::new("derivative estimates");
    report.note(format!("C = 2 + 2M = {c}, {} replicas", fields.n_replicas()));

    report.at_most("|F(0,0,0)|", mean[grid.index(0, 0, 0)].abs(), 1e-14);
    for (k, (t, h)) in grid.points().enumerate() {
        let norm = (h[0] * h[0] + h[1] * h[1]).sqrt();
        report.at_most(
            format!("t={t:.3} h=({:.3},{:.3}) |F|", h[0], h[1]),
            mean[k].abs(),
            c * (t + norm) + 1e-14,
        );
    }

    let noise = |stencil: &Stencil| {
        let (m, se) = stencil_stat(fields, stencil);
        (m, SIGMAS * se + 1e-12)
    };
    for k in 0..grid.len() {
        let (it, i1, i2) = grid.unindex(k);
        let p = [it, i1, i2];
        let (t, h) = grid.point(k);
        let at = format!("t={t:.3} h=({:.3},{:.3})", h[0], h[1]);
        if let Some(s) = forward_d1(&grid, p, 0) {
            let (v, tol) = noise(&s);
            report.at_most(format!("{at} |dt F|"), v.abs(), c + tol);
        }
        let mut grad = [None, None];
        for axis in 1..3 {
            if let Some(s) = forward_d1(&grid, p, axis) {
                let (v, tol) = noise(&s);
                report.at_most(format!("{at} |d{axis} F|"), v.abs(), c + tol);
                report.at_least(format!("{at} d{axis} F"), v, -tol);
                grad[axis - 1] = Some((v, tol));
            }
        }
        if let (Some(bound), [Some((g1, t1)), Some((g2, t2))]) = (grad_bound, grad) {
            report.at_most(format!("{at} |grad F|"), g1.hypot(g2), bound + t1.hypot(t2));
        }
        for axis in 0..3 {
            if let Some(s) = central_d2(&grid, p, axis) {
                let (v, tol) = noise(&s);
                let name = if axis == 0 { "t".to_string() } else { format!("h{axis}") };
                report.at_least(format!("{at} second difference in {name}"), v, -tol);
            }
        }
        if let Some(s) = forward_mixed(&grid, p) {
            let (v, tol) = noise(&s);
            report.at_least(format!("{at} mixed difference"), v, -tol);
        }
    }

    // At t = 0 a product prior decouples: F(0,h) = F(0,h₁,0) + F(0,0,h₂)
    // for every replica, so the mixed difference vanishes.
    let mut worst = 0.0f64;
    for f in &fields.fields {
        for i1 in 0..grid.n_h {
            for i2 in 0..grid.n_h {
                let split = f[grid.index(0, i1, i2)]
                    - f[grid.index(0, i1, 0)]
                    - f[grid.index(0, 0, i2)]
                    + f[grid.index(0, 0, 0)];
                worst = worst.max(split.abs());
            }
        }
    }
    report.at_most("t=0 max |F(h) - F(h1,0) - F(0,h2)|", worst, 1e-12);
    Ok(report)
}

/// Per-replica finite-difference derivatives of `F_n` against the overlap
/// formulas `∂₁F̄ = E⟨x·x'⟩/N`, `∂₂F̄ = E⟨y·y'⟩/N`, `∂ₜF̄ = E⟨(x·x')(y·y')⟩/N²`.
///
/// Uses central differences with `step` and compares the disorder means of
/// `FD − overlap` with zero at `tolerance`, reporting the standard error.
/// Requires enumerable priors.
pub fn overlap_fd_check(
    config: &ModelConfig,
    prior: &PriorSpec,
    points: &[(f64, [f64; 2])],
    n_disorder: usize,
    seed: u64,
    step: f64,
    tolerance: f64,
) -> Result<CheckReport> {
    if n_disorder < 2 {
        return Err(Error::InvalidConfig("need at least two disorder replicas".into()));
    }
    if points.iter().any(|(t, h)| *t < step || h[0] < step || h[1] < step) {
        return Err(Error::InvalidConfig(format!(
            "points must lie at least {step} inside the orthant"
        )));
    }
    let big_n = config.big_n();
    // For each replica and point: [FD₁ − q₁, FD₂ − q₂, FDₜ − qₜ].
    // Each replica averages the draw with its noise-negated twin
    // `(X, Y, −W, −U, −V)`, an equally distributed draw; this cancels the
    // part of the fluctuation that is odd in the noise.
    let rows = try_map_indexed(n_disorder, |r| -> Result<Vec<f64>> {
        let d = sample_disorder(config, prior, replica_seed(seed, r))?;
        let twin = d.antithetic();
        let mut row = vec![0.0; 3 * points.len()];
        for draw in [&d, &twin] {
            let e = Enumerator::new(config, prior, draw)?;
            for (i, &(t, h)) in points.iter().enumerate() {
                let mo = e.moments(t, h);
                let fd = |dt: f64, dh: [f64; 2]| {
                    let up = e.free_energy(t + dt, [h[0] + dh[0], h[1] + dh[1]]);
                    let down = e.free_energy(t - dt, [h[0] - dh[0], h[1] - dh[1]]);
                    (up - down) / (2.0 * step)
                };
                row[3 * i] += 0.5 * (fd(0.0, [step, 0.0]) - mo.overlap_x() / big_n);
                row[3 * i + 1] += 0.5 * (fd(0.0, [0.0, step]) - mo.overlap_y() / big_n);
                row[3 * i + 2] += 0.5 * (fd(step, [0.0, 0.0]) - mo.overlap_xy() / (big_n * big_n));
            }
        }
        Ok(row)
    })?;
    let (means, ses) = column_mean_se(&rows);
    let mut report = CheckReport::new("overlap formulas against finite differences");
    report.note(format!("{n_disorder} antithetic replica pairs, step {step}"));
    for (i, &(t, h)) in points.iter().enumerate() {
        for (j, name) in ["d1 F vs qx", "d2 F vs qy", "dt F vs qxy"].iter().enumerate() {
            let k = 3 * i + j;
            report.at_most(
                format!("t={t:.3} h=({:.3},{:.3}) {name} (se {:.1e})", h[0], h[1], ses[k]),
                means[k].abs(),
                tolerance,
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_energy::mc::Evaluator;
    use crate::free_energy::mcmc::McmcParams;
    use crate::grid::GridSpec3;

    fn exact_fields(n: usize, points: usize, replicas: usize) -> ReplicaFields {
        let c = ModelConfig::new(n, 1.0).unwrap();
        let g = GridSpec3::cube(1.0, points).unwrap();
        ReplicaFields::compute(
            &c,
            &PriorSpec::rademacher(),
            &g,
            replicas,
            3,
            &McmcParams::default(),
            Evaluator::Exact,
        )
        .unwrap()
    }

    #[test]
    fn residual_holds_for_small_model() {
        let f = exact_fields(3, 9, 300);
        let r = approximate_hj_residual_check(&f, ResidualOptions::default()).unwrap();
        assert!(r.passed, "{r}");
        assert_eq!(r.items.len(), 7 * 7 * 7);
    }

    #[test]
    fn residual_rejects_coarse_grid() {
        let f = exact_fields(2, 6, 4);
        assert!(matches!(
            approximate_hj_residual_check(&f, ResidualOptions::default()),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn derivative_estimates_hold() {
        let f = exact_fields(3, 9, 100);
        let r = derivative_bounds(&f, 1.0, Some(2.0)).unwrap();
        assert!(r.passed, "{r}");
    }

    #[test]
    fn derivative_estimates_catch_a_decreasing_field() {
        let mut f = exact_fields(2, 5, 10);
        let g = f.grid;
        for field in &mut f.fields {
            for (k, v) in field.iter_mut().enumerate() {
                let (_, h) = g.point(k);
                *v -= 3.0 * h[0];
            }
        }
        assert!(!derivative_bounds(&f, 1.0, None).unwrap().passed);
    }

    #[test]
    fn decoupled_residual_is_small() {
        let c = ModelConfig::new(3, 1.0).unwrap();
        let r = decoupled_overlap_residual(&c, &PriorSpec::rademacher(), &[0.25, 0.75], 400, 5, SIGMAS)
            .unwrap();
        assert!(r.passed, "{r}");
    }

    #[test]
    fn overlaps_match_finite_differences() {
        let c = ModelConfig::new(3, 1.0).unwrap();
        let pts = [(0.5, [0.5, 0.5]), (0.8, [0.2, 0.9])];
        let r = overlap_fd_check(&c, &PriorSpec::rademacher(), &pts, 20_000, 9, 1e-4, 0.01).unwrap();
        assert!(r.passed, "{r}");
    }
}
