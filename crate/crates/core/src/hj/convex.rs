//! Sampled convex functions on `[0, H]` and their Fenchel transforms over
//! the half-line, `u*(z) = sup_{y ≥ 0} {zy − u(y)}`.

use serde::{Deserialize, Serialize};

use crate::check::CheckReport;
use crate::error::{Error, Result};

/// Relative tolerance for convexity and monotonicity of samples.
const SHAPE_TOL: f64 = 1e-12;

/// What the samples say about `u` beyond the last node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// `u` continues linearly with its last slope. Conjugate values are
    /// exact for every `z`, and `+∞` above the last slope.
    Linear,
    /// `u` is a truncation of a function that keeps bending. Any result that
    /// depends on the region beyond the last node is reported as an error.
    Truncated,
}

/// Samples `(yᵢ, u(yᵢ))` on a uniform grid over `[0, h_max]`, read as the
/// piecewise-linear interpolant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexFn1D {
    pub h_max: f64,
    pub values: Vec<f64>,
    /// Largest absolute slope between neighbouring samples.
    pub lipschitz: f64,
    /// Whether the samples are convex and nondecreasing.
    pub convexified: bool,
    pub tail: Tail,
}

impl ConvexFn1D {
    pub fn new(h_max: f64, values: Vec<f64>, tail: Tail) -> Result<Self> {
        if !(h_max > 0.0 && h_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("h_max must be positive, got {h_max}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidConfig("need at least two samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("samples must be finite".into()));
        }
        let mut u = ConvexFn1D {
            h_max,
            values,
            lipschitz: 0.0,
            convexified: false,
            tail,
        };
        let slopes = u.slopes();
        u.lipschitz = slopes.iter().fold(0.0, |a, s| a.max(s.abs()));
        let scale = u.lipschitz.max(1.0);
        u.convexified = slopes[0] >= -SHAPE_TOL * scale
            && slopes.windows(2).all(|w| w[1] >= w[0] - SHAPE_TOL * scale);
        Ok(u)
    }

    /// Samples `f` at `n` uniform nodes of `[0, h_max]`.
    pub fn from_fn(h_max: f64, n: usize, tail: Tail, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig("need at least two samples".into()));
        }
        let step = h_max / (n - 1) as f64;
        let values = (0..n).map(|i| f(i as f64 * step)).collect();
        Self::new(h_max, values, tail)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.h_max / (self.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.len() {
            self.h_max
        } else {
            i as f64 * self.step()
        }
    }

    pub fn slopes(&self) -> Vec<f64> {
        let d = self.step();
        self.values.windows(2).map(|w| (w[1] - w[0]) / d).collect()
    }

    /// Slope of the last piece.
    pub fn last_slope(&self) -> f64 {
        let n = self.len();
        (self.values[n - 1] - self.values[n - 2]) / self.step()
    }

    /// The interpolant at `y ≥ 0`, continued linearly beyond `h_max`.
    pub fn eval(&self, y: f64) -> f64 {
        let n = self.len();
        if y >= self.h_max {
            return self.values[n - 1] + (y - self.h_max) * self.last_slope();
        }
        let s = (y.max(0.0) / self.step()).min((n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let w = s - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// The largest convex nondecreasing minorant of the samples on `[0, H]`,
    /// sampled on the same grid: the lower convex hull, flattened to its
    /// minimum on the left of the minimizer.
    pub fn convexify(&self) -> ConvexFn1D {
        let n = self.len();
        let mut hull: Vec<usize> = Vec::with_capacity(n);
        for i in 0..n {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                // Drop b if it lies on or above the chord a–i.
                let lhs = (self.values[b] - self.values[a]) * (i - a) as f64;
                let rhs = (self.values[i] - self.values[a]) * (b - a) as f64;
                if lhs >= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        let mut values = vec![0.0; n];
        for w in hull.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (k, v) in values.iter_mut().enumerate().take(b + 1).skip(a) {
                let lam = (k - a) as f64 / (b - a) as f64;
                *v = self.values[a] * (1.0 - lam) + self.values[b] * lam;
            }
        }
        if hull.len() == 1 {
            values[0] = self.values[0];
        }
        let (argmin, min) = values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        for v in values.iter_mut().take(argmin) {
            *v = min;
        }
        let mut out = ConvexFn1D::new(self.h_max, values, self.tail).expect("valid samples");
        out.convexified = true;
        out
    }
}

/// `u*` on a uniform dual grid over `[0, z_max]`, with exact evaluation of
/// the conjugate of the interpolant at any `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjugate1D {
    pub z_max: f64,
    pub values: Vec<f64>,
    primal: ConvexFn1D,
    slopes: Vec<f64>,
}

impl Conjugate1D {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        if self.len() < 2 {
            0.0
        } else {
            self.z_max / (self.len() - 1) as f64
        }
    }

    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.len() {
            self.z_max
        } else {
            j as f64 * self.step()
        }
    }

    pub fn primal(&self) -> &ConvexFn1D {
        &self.primal
    }

    /// Largest slope of the primal, beyond which `u* = +∞` (linear tail) or
    /// depends on the truncation.
    pub fn slope_limit(&self) -> f64 {
        self.slopes.last().copied().unwrap_or(0.0).max(0.0)
    }

    /// Exact `u*(z)` for the interpolant, `z ≥ 0`.
    pub fn value_at(&self, z: f64) -> f64 {
        let limit = self.slope_limit();
        if z > limit * (1.0 + 1e-14) + 1e-300 {
            return f64::INFINITY;
        }
        // The maximizing node is the first one whose right slope reaches z.
        let k = self.slopes.partition_point(|&s| s < z);
        z * self.primal.node(k) - self.primal.values[k]
    }
}

/// Legendre transform of a convex nondecreasing sampled function on the
/// dual grid `z_j = j z_max/(n_z − 1)`, by a single sweep over the slopes.
///
/// Exact for the piecewise-linear interpolant. `z_max` above the last slope
/// is an error for a truncated tail, since the maximizer would sit at the
/// edge of the primal grid.
pub fn conjugate_1d(u: &ConvexFn1D, z_max: f64, n_z: usize) -> Result<Conjugate1D> {
    if !u.convexified {
        return Err(Error::InvalidConfig(
            "conjugate_1d needs convex nondecreasing samples; convexify first".into(),
        ));
    }
    if n_z < 2 || !(z_max >= 0.0 && z_max.is_finite()) {
        return Err(Error::InvalidConfig(format!("bad dual grid: z_max {z_max}, {n_z} points")));
    }
    let slopes = u.slopes();
    let limit = slopes.last().copied().unwrap_or(0.0).max(0.0);
    if u.tail == Tail::Truncated && z_max > limit * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::EdgeAttained { z: z_max });
    }
    let dz = z_max / (n_z - 1) as f64;
    let mut values = Vec::with_capacity(n_z);
    let mut k = 0;
    for j in 0..n_z {
        let z = if j + 1 == n_z { z_max } else { j as f64 * dz };
        if z > limit * (1.0 + 1e-14) + 1e-300 {
            values.push(f64::INFINITY);
            continue;
        }
        while k < slopes.len() && slopes[k] < z {
            k += 1;
        }
        values.push(z * u.node(k) - u.values[k]);
    }
    Ok(Conjugate1D {
        z_max,
        values,
        primal: u.clone(),
        slopes,
    })
}

/// `u**` on the primal grid, with the transforms taken over `[0, H]` and the
/// dual grid `[0, z_max]` by direct maximization (no shape assumptions).
pub fn biconjugate_on_grid(u: &ConvexFn1D, z_max: f64, n_z: usize) -> Vec<f64> {
    let dz = if n_z > 1 { z_max / (n_z - 1) as f64 } else { 0.0 };
    let zs: Vec<f64> = (0..n_z).map(|j| j as f64 * dz).collect();
    let ustar: Vec<f64> = zs
        .iter()
        .map(|&z| {
            (0..u.len())
                .map(|i| z * u.node(i) - u.values[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    (0..u.len())
        .map(|i| {
            let y = u.node(i);
            zs.iter()
                .zip(&ustar)
                .map(|(z, s)| z * y - s)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Checks `u** = u` for convex nondecreasing samples, and otherwise that
/// `u**` is the convex nondecreasing envelope (so `u** ≤ u`).
///
/// The dual grid spans `[0, L]` with `L` the envelope's last slope; the
/// allowed gap is `2 max(δ_y L, δ_z H)`, which is zero in exact arithmetic
/// whenever the slopes of `u` lie on the dual grid.
pub fn fenchel_moreau_check(u: &ConvexFn1D, n_z: usize) -> CheckReport {
    let envelope = u.convexify();
    let z_max = envelope.last_slope().max(0.0);
    let n_z = n_z.max(2);
    let u2 = biconjugate_on_grid(u, z_max, n_z);
    let dz = z_max / (n_z - 1) as f64;
    let bound = 2.0 * (u.step() * z_max).max(dz * u.h_max);
    let scale = u.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let round = 1e-12 * scale;
    let gap = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));

    let mut report = CheckReport::new("Fenchel-Moreau");
    let above = u2
        .iter()
        .zip(&u.values)
        .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
    report.at_most("max(u** - u)", above, round);
    report.at_most("sup |u** - envelope|", gap(&u2, &envelope.values), bound + round);
    if u.convexified {
        report.note("input is convex and nondecreasing: u** = u");
        report.at_most("sup |u** - u|", gap(&u2, &u.values), bound + round);
    } else {
        report.note("input is not convex nondecreasing: u** is its envelope, strictly below u somewhere");
        report.at_least("sup |u - envelope|", gap(&u.values, &envelope.values), round);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spherical(y: f64) -> f64 {
        y - 0.5 * (1.0 + 2.0 * y).ln()
    }

    #[test]
    fn identity_has_flat_conjugate() {
        let u = ConvexFn1D::from_fn(4.0, 41, Tail::Linear, |y| y).unwrap();
        let c = conjugate_1d(&u, 1.0, 11).unwrap();
        assert!(c.values.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(c.value_at(1.5), f64::INFINITY);
        let c = conjugate_1d(&u, 1.5, 4).unwrap();
        assert_eq!(c.values[3], f64::INFINITY);
    }

    #[test]
    fn half_square_is_self_conjugate() {
        // Slopes of the interpolant are (i + ½)δ; on the dual nodes z = jδ the
        // conjugate of the interpolant is z²/2 + δ²/8 at midpoints, z²/2 at nodes.
        let u = ConvexFn1D::from_fn(3.0, 3001, Tail::Truncated, |y| 0.5 * y * y).unwrap();
        let c = conjugate_1d(&u, 2.0, 201).unwrap();
        for j in 0..c.len() {
            let z = c.node(j);
            assert!((c.values[j] - 0.5 * z * z).abs() < 2e-7, "z {z}");
        }
    }

    #[test]
    fn spherical_conjugate_matches_dense_search() {
        let u = ConvexFn1D::from_fn(6.0, 60_001, Tail::Truncated, spherical).unwrap();
        let c = conjugate_1d(&u, 0.8, 9).unwrap();
        // Brute-force maximization on a 1e-5 grid.
        let brute = (0..600_001)
            .map(|i| {
                let y = i as f64 * 1e-5;
                0.5 * y - spherical(y)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((c.value_at(0.5) - brute).abs() < 1e-9);
        assert!((brute - 0.096_57).abs() < 1e-5);
        assert!((c.values[5] - brute).abs() < 1e-9);
    }

    #[test]
    fn truncated_tail_flags_edge() {
        let u = ConvexFn1D::from_fn(2.0, 21, Tail::Truncated, spherical).unwrap();
        let limit = u.last_slope();
        assert!(matches!(conjugate_1d(&u, 1.0, 10), Err(Error::EdgeAttained { .. })));
        assert!(conjugate_1d(&u, limit, 10).is_ok());
    }

    #[test]
    fn requires_convex_input() {
        let u = ConvexFn1D::from_fn(2.0, 21, Tail::Linear, |y| (y - 1.0).abs()).unwrap();
        assert!(!u.convexified);
        assert!(conjugate_1d(&u, 1.0, 10).is_err());
    }

    #[test]
    fn envelope_of_absolute_value() {
        let u = ConvexFn1D::from_fn(2.0, 21, Tail::Linear, |y| (y - 1.0).abs()).unwrap();
        let r = fenchel_moreau_check(&u, 21);
        assert!(r.passed, "{r}");
        let env = u.convexify();
        for i in 0..u.len() {
            let y = u.node(i);
            assert!((env.values[i] - (y - 1.0).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_of_decreasing_function_is_its_minimum() {
        let u = ConvexFn1D::from_fn(2.0, 11, Tail::Linear, |y| -y).unwrap();
        let r = fenchel_moreau_check(&u, 5);
        assert!(r.passed, "{r}");
        let u2 = biconjugate_on_grid(&u, 0.0, 2);
        assert!(u2.iter().all(|v| (v + 2.0).abs() < 1e-12));
    }

    #[test]
    fn round_trip_is_exact_on_shared_grids() {
        // Slopes 0, 0.5, 1, 2 all lie on the dual grid of step 0.25.
        let knots = [0.0, 0.0, 0.5, 1.5, 3.5, 5.5];
        let u = ConvexFn1D::new(5.0, knots.to_vec(), Tail::Linear).unwrap();
        let u2 = biconjugate_on_grid(&u, 2.0, 9);
        for (a, b) in u2.iter().zip(&knots) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(fenchel_moreau_check(&u, 9).passed);
    }

    proptest! {
        #[test]
        fn conjugate_matches_direct_maximization(
            slopes in prop::collection::vec(0.0f64..3.0, 2..30),
            z in 0.0f64..1.0,
        ) {
            let mut s = slopes.clone();
            s.sort_by(f64::total_cmp);
            let mut values = vec![0.0];
            for v in &s {
                values.push(values.last().unwrap() + v * 0.1);
            }
            let h = 0.1 * s.len() as f64;
            let u = ConvexFn1D::new(h, values, Tail::Linear).unwrap();
            prop_assume!(u.convexified);
            let z = z * u.last_slope();
            let c = conjugate_1d(&u, u.last_slope(), 7).unwrap();
            let direct = (0..u.len())
                .map(|i| z * u.node(i) - u.values[i])
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((c.value_at(z) - direct).abs() < 1e-12);
            for j in 0..c.len() {
                let zj = c.node(j);
                let d = (0..u.len())
                    .map(|i| zj * u.node(i) - u.values[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                prop_assert!((c.values[j] - d).abs() < 1e-12);
            }
        }

        #[test]
        fn envelope_is_a_convex_nondecreasing_minorant(
            values in prop::collection::vec(-2.0f64..2.0, 2..25),
        ) {
            let u = ConvexFn1D::new(1.0, values.clone(), Tail::Linear).unwrap();
            let env = u.convexify();
            let again = ConvexFn1D::new(1.0, env.values.clone(), Tail::Linear).unwrap();
            prop_assert!(again.convexified);
            for (e, v) in env.values.iter().zip(&values) {
                prop_assert!(*e <= v + 1e-12);
            }
            prop_assert!(fenchel_moreau_check(&u, 4 * values.len()).passed);
        }
    }
}
