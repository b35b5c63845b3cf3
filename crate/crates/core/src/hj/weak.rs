//! Property checks for weak solutions of `∂ₜf = ∂₁f ∂₂f`: the equation
//! almost everywhere, the initial slice, monotonicity in `h`, the
//! four-point partial convexity inequality and the Lipschitz bound, plus a
//! semigroup self-consistency check of the Hopf formula.

use serde::{Deserialize, Serialize};

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::grid::ScalarField3;

use super::hopf::HopfSolution;

/// Minimum points per axis for the property suite.
pub const MIN_POINTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakOptions {
    /// Absolute tolerance on the sign conditions.
    pub tol: f64,
    /// Allowed `|f(0, h) − ψ(h)|`.
    pub initial_tol: f64,
    /// A point is a kink when a second difference exceeds this multiple of
    /// the median second difference along the same axis.
    pub kink_factor: f64,
    /// Multiplier on the local difference-quotient slack in the residual.
    pub slack_factor: f64,
}

impl Default for WeakOptions {
    fn default() -> Self {
        WeakOptions {
            tol: 1e-8,
            initial_tol: 1e-6,
            kink_factor: 10.0,
            slack_factor: 2.0,
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Runs the full suite on `field`. `psi` is the initial condition and
/// `lipschitz_bound` the bound on both `|∇ₕf|` and `|∂ₜf|`.
pub fn weak_solution_checks(
    field: &ScalarField3,
    psi: impl Fn([f64; 2]) -> Result<f64>,
    lipschitz_bound: f64,
    options: WeakOptions,
) -> Result<CheckReport> {
    let g = field.grid;
    if g.n_t < MIN_POINTS || g.n_h < MIN_POINTS {
        return Err(Error::GridTooCoarse(format!(
            "weak-solution checks need at least {MIN_POINTS} points per axis, got {} x {}",
            g.n_t, g.n_h
        )));
    }
    let (n, dt, dh, tol) = (g.n_h, g.dt(), g.dh(), options.tol);
    let f = |it: usize, i: usize, j: usize| field.at(it, i, j);
    let mut report = CheckReport::new("weak solution");

    // Initial slice.
    let mut initial_gap = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let h = [g.h(i), g.h(j)];
            initial_gap = initial_gap.max((f(0, i, j) - psi(h)?).abs());
        }
    }
    report.at_most("max |f(0,h) - psi(h)|", initial_gap, options.initial_tol);

    // Monotonicity and four-point inequality, one item each per slice.
    for it in 0..g.n_t {
        let mut monotone = f64::INFINITY;
        let mut four_point = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                let c = f(it, i, j);
                if i + 1 < n {
                    monotone = monotone.min(f(it, i + 1, j) - c);
                }
                if j + 1 < n {
                    monotone = monotone.min(f(it, i, j + 1) - c);
                }
                for k in 1..n {
                    if i + k < n && j + k < n {
                        let v = f(it, i + k, j + k) + c - f(it, i + k, j) - f(it, i, j + k);
                        four_point = four_point.min(v);
                    }
                    if i + 2 * k < n {
                        four_point = four_point.min(f(it, i + 2 * k, j) + c - 2.0 * f(it, i + k, j));
                    }
                    if j + 2 * k < n {
                        four_point = four_point.min(f(it, i, j + 2 * k) + c - 2.0 * f(it, i, j + k));
                    }
                }
            }
        }
        let t = g.t(it);
        report.at_least(format!("t={t:.4} min forward difference in h"), monotone, -tol);
        report.at_least(format!("t={t:.4} min four-point expression"), four_point, -tol);
    }

    // Lipschitz bound from forward differences.
    let mut grad = 0.0f64;
    let mut time_slope = 0.0f64;
    for it in 0..g.n_t {
        for i in 0..n {
            for j in 0..n {
                let c = f(it, i, j);
                let d1 = if i + 1 < n { (f(it, i + 1, j) - c) / dh } else { 0.0 };
                let d2 = if j + 1 < n { (f(it, i, j + 1) - c) / dh } else { 0.0 };
                grad = grad.max(d1.hypot(d2));
                if it + 1 < g.n_t {
                    time_slope = time_slope.max((f(it + 1, i, j) - c).abs() / dt);
                }
            }
        }
    }
    report.at_most("max |grad_h f|", grad, lipschitz_bound + tol);
    report.at_most("max |d_t f|", time_slope, lipschitz_bound + tol);

    // Equation residual at interior points away from kinks.
    let mut jumps = [Vec::new(), Vec::new(), Vec::new()];
    let second = |it: usize, i: usize, j: usize| -> [f64; 3] {
        let c = 2.0 * f(it, i, j);
        [
            (f(it + 1, i, j) - c + f(it - 1, i, j)).abs() / dt,
            (f(it, i + 1, j) - c + f(it, i - 1, j)).abs() / dh,
            (f(it, i, j + 1) - c + f(it, i, j - 1)).abs() / dh,
        ]
    };
    for it in 1..g.n_t - 1 {
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                for (a, v) in second(it, i, j).into_iter().enumerate() {
                    jumps[a].push(v);
                }
            }
        }
    }
    let thresholds = jumps.map(|v| options.kink_factor * median(v) + 1e-12);
    let mut kinks = 0usize;
    let mut checked = 0usize;
    for it in 1..g.n_t - 1 {
        let mut worst_excess = f64::NEG_INFINITY;
        let mut worst = (0.0, 0.0);
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let s = second(it, i, j);
                if s.iter().zip(&thresholds).any(|(v, th)| v > th) {
                    kinks += 1;
                    continue;
                }
                checked += 1;
                let ft = (f(it + 1, i, j) - f(it - 1, i, j)) / (2.0 * dt);
                let p1 = (f(it, i + 1, j) - f(it, i - 1, j)) / (2.0 * dh);
                let p2 = (f(it, i, j + 1) - f(it, i, j - 1)) / (2.0 * dh);
                // Half a second difference bounds |central − derivative|
                // along any axis where f is convex.
                let e = s.map(|v| 0.5 * v);
                let slack =
                    options.slack_factor * (e[0] + p2.abs() * e[1] + p1.abs() * e[2] + e[1] * e[2]) + tol;
                let residual = (ft - p1 * p2).abs();
                if residual - slack > worst_excess {
                    worst_excess = residual - slack;
                    worst = (residual, slack);
                }
            }
        }
        if worst_excess > f64::NEG_INFINITY {
            report.at_most(format!("t={:.4} equation residual", g.t(it)), worst.0, worst.1);
        }
    }
    report.note(format!("equation residual checked at {checked} points, {kinks} kink points excluded"));
    Ok(report)
}

/// [`weak_solution_checks`] for the Hopf solution on `field`'s grid.
pub fn hopf_weak_checks(
    solution: &HopfSolution,
    field: &ScalarField3,
    options: WeakOptions,
) -> Result<CheckReport> {
    if solution.d != 2 {
        return Err(Error::InvalidConfig("weak-solution checks need d = 2".into()));
    }
    weak_solution_checks(
        field,
        |h| Ok(solution.initial_value(&h)),
        solution.lipschitz_bound(),
        options,
    )
}

/// Resolution of the resampled slice in [`semigroup_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemigroupOptions {
    /// Points per axis of the box carrying the time-`t` slice.
    pub primal_points: usize,
    /// Points per axis of the dual grid for the second step.
    pub dual_points: usize,
    /// Multiplier on the grid-driven error bound.
    pub factor: f64,
}

impl Default for SemigroupOptions {
    fn default() -> Self {
        SemigroupOptions {
            primal_points: 161,
            dual_points: 161,
            factor: 3.0,
        }
    }
}

/// Compares `f(t + s, ·)` against one step of length `s` started from the
/// time-`t` slice. The slice is not separable, so the second step uses a
/// two-dimensional discrete conjugate over a box that contains every
/// characteristic foot `y = h + s (z₂, z₁)`.
pub fn semigroup_check(
    solution: &HopfSolution,
    t: f64,
    s: f64,
    h_axis: &[f64],
    options: SemigroupOptions,
) -> Result<CheckReport> {
    if solution.d != 2 {
        return Err(Error::InvalidConfig("semigroup check needs d = 2".into()));
    }
    if !(t >= 0.0 && s >= 0.0) || h_axis.iter().any(|h| !(*h >= 0.0)) {
        return Err(Error::InvalidConfig(format!("need t, s, h >= 0, got t={t}, s={s}")));
    }
    let (n_y, n_z) = (options.primal_points.max(2), options.dual_points.max(2));
    let limits = [solution.conjugates[0].slope_limit(), solution.conjugates[1].slope_limit()];
    let h_max = h_axis.iter().fold(0.0f64, |m, h| m.max(*h));
    let extent = h_max + s * limits[0].max(limits[1]) + 0.5;
    let dy = extent / (n_y - 1) as f64;
    let y = |k: usize| k as f64 * dy;

    let mut slice = vec![0.0; n_y * n_y];
    for a in 0..n_y {
        for b in 0..n_y {
            slice[a * n_y + b] = solution.evaluate_2d(t, [y(a), y(b)])?;
        }
    }
    let mut report = CheckReport::new(format!("semigroup t={t} s={s}"));

    // The slice must still be convex in each coordinate.
    let mut convexity = f64::INFINITY;
    for a in 0..n_y {
        for b in 1..n_y - 1 {
            let row = slice[a * n_y + b - 1] - 2.0 * slice[a * n_y + b] + slice[a * n_y + b + 1];
            let col = slice[(b - 1) * n_y + a] - 2.0 * slice[b * n_y + a] + slice[(b + 1) * n_y + a];
            convexity = convexity.min(row).min(col);
        }
    }
    report.at_least("resampled slice min second difference", convexity, -1e-9);

    // Dual range: the largest slope of the slice along each axis.
    let mut slope = [0.0f64; 2];
    for a in 0..n_y {
        for b in 0..n_y - 1 {
            slope[1] = slope[1].max((slice[a * n_y + b + 1] - slice[a * n_y + b]) / dy);
            slope[0] = slope[0].max((slice[(b + 1) * n_y + a] - slice[b * n_y + a]) / dy);
        }
    }
    let dz = slope.map(|l| l / (n_z - 1) as f64);
    let z = |axis: usize, k: usize| if k + 1 == n_z { slope[axis] } else { k as f64 * dz[axis] };

    // g*(z₁, z₂) = max_{y₁} [z₁ y₁ + max_{y₂} (z₂ y₂ − g(y₁, y₂))].
    let mut inner = vec![0.0; n_y * n_z];
    for a in 0..n_y {
        for k2 in 0..n_z {
            let z2 = z(1, k2);
            inner[a * n_z + k2] = (0..n_y)
                .map(|b| z2 * y(b) - slice[a * n_y + b])
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }
    let mut conj = vec![0.0; n_z * n_z];
    for k1 in 0..n_z {
        let z1 = z(0, k1);
        for k2 in 0..n_z {
            conj[k1 * n_z + k2] = (0..n_y)
                .map(|a| z1 * y(a) + inner[a * n_z + k2])
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }

    let mut gap = 0.0f64;
    for &h1 in h_axis {
        for &h2 in h_axis {
            let direct = solution.evaluate_2d(t + s, [h1, h2])?;
            let mut stepped = f64::NEG_INFINITY;
            for k1 in 0..n_z {
                let z1 = z(0, k1);
                for k2 in 0..n_z {
                    let z2 = z(1, k2);
                    stepped = stepped.max(z1 * h1 + z2 * h2 - conj[k1 * n_z + k2] + s * z1 * z2);
                }
            }
            gap = gap.max((direct - stepped).abs());
        }
    }
    // Grid maximization errors: the conjugate objective is Lipschitz in y
    // with constant |z| + |∇g|, the outer one in z with |h| + |y| + s|z|.
    let l = slope[0].hypot(slope[1]);
    let y_error = 2.0 * l * dy;
    let z_error = (std::f64::consts::SQRT_2 * (h_max + extent) + s * l) * dz[0].max(dz[1]);
    let bound = options.factor * (y_error + z_error) + 1e-9;
    report.at_most("sup |f(t+s) - S(s) f(t)|", gap, bound);
    report.note(format!("box [0, {extent:.3}]^2 with step {dy:.4}, dual steps {dz:?}"));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec3;
    use crate::hj::{ConvexFn1D, InitialCondition, Tail};
    use crate::model::PriorSpec;

    fn hopf(ic: &InitialCondition, grid: &GridSpec3) -> (HopfSolution, ScalarField3) {
        let s = HopfSolution::from_initial(ic, grid.h_max, grid.t_max, 2001, 201).unwrap();
        let f = s.field(grid).unwrap();
        (s, f)
    }

    #[test]
    fn spherical_and_iid_solutions_pass() {
        let grid = GridSpec3::cube(1.0, 17).unwrap();
        for ic in [
            InitialCondition::Spherical { alpha: 1.0 },
            InitialCondition::Iid { prior: PriorSpec::rademacher(), alpha: 1.0 },
        ] {
            let (s, f) = hopf(&ic, &grid);
            let report = hopf_weak_checks(&s, &f, WeakOptions::default()).unwrap();
            assert!(report.passed, "{report}");
        }
    }

    #[test]
    fn linear_data_has_flat_four_point_expression() {
        let grid = GridSpec3::cube(1.0, 9).unwrap();
        let (s, f) = hopf(&InitialCondition::Linear { a: [0.3, 0.7] }, &grid);
        let report = hopf_weak_checks(&s, &f, WeakOptions::default()).unwrap();
        assert!(report.passed, "{report}");
        for item in report.items.iter().filter(|i| i.label.contains("four-point")) {
            assert!(item.value.abs() < 1e-12, "{item:?}");
        }
    }

    #[test]
    fn lowered_point_is_caught() {
        let grid = GridSpec3::cube(1.0, 9).unwrap();
        let (s, mut f) = hopf(&InitialCondition::Spherical { alpha: 1.0 }, &grid);
        let k = grid.index(4, 4, 4);
        f.values[k] -= 0.1;
        let report = hopf_weak_checks(&s, &f, WeakOptions::default()).unwrap();
        assert!(!report.passed);
        assert!(report.failures().any(|i| i.label.contains("four-point") || i.label.contains("forward")));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = GridSpec3::cube(1.0, 5).unwrap();
        let (s, f) = hopf(&InitialCondition::Zero, &grid);
        assert!(matches!(
            hopf_weak_checks(&s, &f, WeakOptions::default()),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn semigroup_holds() {
        let axis: Vec<f64> = (0..6).map(|i| 0.2 * i as f64).collect();
        let linear = [
            ConvexFn1D::from_fn(6.0, 11, Tail::Linear, |y| 0.3 * y).unwrap(),
            ConvexFn1D::from_fn(6.0, 11, Tail::Linear, |y| 0.7 * y).unwrap(),
        ];
        let s = HopfSolution::new(&linear, 21).unwrap();
        let r = semigroup_check(&s, 0.5, 0.7, &axis, SemigroupOptions::default()).unwrap();
        assert!(r.passed && r.worst().unwrap().value < 1e-10, "{r}");

        let ic = InitialCondition::Spherical { alpha: 1.0 };
        let s = HopfSolution::from_initial(&ic, 1.0, 1.0, 2001, 201).unwrap();
        let small = SemigroupOptions { primal_points: 81, dual_points: 81, factor: 3.0 };
        for (t, step) in [(0.5, 0.0), (0.5, 0.5)] {
            let r = semigroup_check(&s, t, step, &axis, small).unwrap();
            assert!(r.passed, "{r}");
        }
    }
}
