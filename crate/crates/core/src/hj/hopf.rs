//! The Hopf formula for `∂ₜf = ∏ᵢ ∂_{hᵢ}f` on the orthant with separable
//! convex nondecreasing initial data:
//!
//! `f(t, h) = sup_{z ≥ 0} { z·h − Σᵢ ψᵢ*(zᵢ) + t ∏ᵢ zᵢ }`.
//!
//! The supremum is taken over a product dual grid and then polished by one
//! golden-section pass per coordinate, where the objective is concave.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec3, Provenance, ScalarField3};
use crate::parallel::try_map_indexed;

use super::convex::{conjugate_1d, Conjugate1D, ConvexFn1D, Tail};
use super::initial::InitialCondition;

/// Dual grid points per coordinate unless stated otherwise.
pub const DEFAULT_DUAL_POINTS: usize = 401;

/// Primal samples per component for closed-form initial conditions.
pub const DEFAULT_PRIMAL_POINTS: usize = 4001;

/// Largest dimension supported by product-grid maximization.
pub const MAX_DIMENSION: usize = 4;

const GOLDEN_ITERATIONS: usize = 80;

/// Conjugates of the components of `ψ`, ready for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfSolution {
    pub d: usize,
    pub conjugates: Vec<Conjugate1D>,
}

impl HopfSolution {
    /// Each conjugate lives on `[0, Lᵢ]` with `Lᵢ` the last slope of `ψᵢ`.
    pub fn new(psis: &[ConvexFn1D], n_dual: usize) -> Result<Self> {
        if psis.is_empty() || psis.len() > MAX_DIMENSION {
            return Err(Error::InvalidConfig(format!(
                "dimension must be in 1..={MAX_DIMENSION}, got {}",
                psis.len()
            )));
        }
        let conjugates = psis
            .iter()
            .map(|u| conjugate_1d(u, u.last_slope().max(0.0), n_dual))
            .collect::<Result<Vec<_>>>()?;
        Ok(HopfSolution {
            d: psis.len(),
            conjugates,
        })
    }

    /// Samples a two-dimensional initial condition far enough out to serve
    /// `h ∈ [0, h_max]²` up to `t_max`.
    pub fn from_initial(
        ic: &InitialCondition,
        h_max: f64,
        t_max: f64,
        n_primal: usize,
        n_dual: usize,
    ) -> Result<Self> {
        let psis = ic.sample(ic.primal_extent(h_max, t_max), n_primal)?;
        Self::new(&psis, n_dual)
    }

    /// `Σ ψᵢ(hᵢ)` from the sampled components.
    pub fn initial_value(&self, h: &[f64]) -> f64 {
        self.conjugates
            .iter()
            .zip(h)
            .map(|(c, &y)| c.primal().eval(y))
            .sum()
    }

    /// Euclidean norm of the largest slopes, `‖ψ‖_Lip`.
    pub fn lipschitz(&self) -> f64 {
        self.conjugates
            .iter()
            .map(|c| c.slope_limit().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `max(‖ψ‖_Lip, sup_{|p| ≤ ‖ψ‖_Lip} |∏ pᵢ|)`.
    pub fn lipschitz_bound(&self) -> f64 {
        let l = self.lipschitz();
        let d = self.d as i32;
        l.max((l / (self.d as f64).sqrt()).powi(d))
    }

    pub fn dual_steps(&self) -> Vec<f64> {
        self.conjugates.iter().map(Conjugate1D::step).collect()
    }

    fn objective(&self, t: f64, h: &[f64], z: &[f64]) -> f64 {
        let mut value = t * z.iter().product::<f64>();
        for ((c, &zi), &hi) in self.conjugates.iter().zip(z).zip(h) {
            value += zi * hi - c.value_at(zi);
        }
        value
    }

    /// Golden-section polish of each coordinate in turn within one dual
    /// step of the grid maximizer; returns the improved value.
    fn refine(&self, t: f64, h: &[f64], z: &mut [f64], mut best: f64) -> Result<f64> {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        for i in 0..self.d {
            let c = &self.conjugates[i];
            let step = c.step();
            if step == 0.0 {
                continue;
            }
            let (mut a, mut b) = ((z[i] - step).max(0.0), (z[i] + step).min(c.z_max));
            let mut trial = z.to_vec();
            let mut eval = |x: f64| {
                trial[i] = x;
                self.objective(t, h, &trial)
            };
            let mut x1 = b - INV_PHI * (b - a);
            let mut x2 = a + INV_PHI * (b - a);
            let (mut f1, mut f2) = (eval(x1), eval(x2));
            for _ in 0..GOLDEN_ITERATIONS {
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + INV_PHI * (b - a);
                    f2 = eval(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - INV_PHI * (b - a);
                    f1 = eval(x1);
                }
            }
            for x in [x1, x2, a, b] {
                let v = eval(x);
                if v > best {
                    best = v;
                    z[i] = x;
                }
            }
            if c.primal().tail == Tail::Truncated && z[i] > c.z_max - 0.5 * step {
                return Err(Error::EdgeAttained { z: z[i] });
            }
        }
        Ok(best)
    }

    /// `f(t, h)` by maximization over the full product dual grid.
    pub fn evaluate(&self, t: f64, h: &[f64]) -> Result<f64> {
        self.check_point(t, h)?;
        let lens: Vec<usize> = self.conjugates.iter().map(Conjugate1D::len).collect();
        let total: usize = lens.iter().product();
        let mut z = vec![0.0; self.d];
        let mut best = f64::NEG_INFINITY;
        let mut best_z = z.clone();
        let mut idx = vec![0usize; self.d];
        for _ in 0..total {
            let mut product = t;
            let mut value = 0.0;
            let mut finite = true;
            for i in 0..self.d {
                let c = &self.conjugates[i];
                z[i] = c.node(idx[i]);
                let ci = c.values[idx[i]];
                finite &= ci.is_finite();
                product *= z[i];
                value += z[i] * h[i] - ci;
            }
            if finite && value + product > best {
                best = value + product;
                best_z.copy_from_slice(&z);
            }
            for i in (0..self.d).rev() {
                idx[i] += 1;
                if idx[i] < lens[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        self.refine(t, h, &mut best_z, best)
    }

    fn check_point(&self, t: f64, h: &[f64]) -> Result<()> {
        if h.len() != self.d {
            return Err(Error::DimensionMismatch {
                what: "h",
                expected: self.d,
                got: h.len(),
            });
        }
        if !(t >= 0.0 && t.is_finite()) || h.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig(format!("(t, h) = ({t}, {h:?}) outside the orthant")));
        }
        Ok(())
    }

    /// Two-dimensional evaluation with the same product-grid maximum as
    /// [`Self::evaluate`] in `O(n_dual)`: for fixed `z₁` the best `z₂` is a
    /// Legendre transform of `ψ₂*` at slope `h₂ + t z₁`, which increases
    /// with `z₁`, so one pointer sweeps it.
    pub fn evaluate_2d(&self, t: f64, h: [f64; 2]) -> Result<f64> {
        if self.d != 2 {
            return Err(Error::InvalidConfig("sweep evaluation needs d = 2".into()));
        }
        self.check_point(t, &h)?;
        self.sweep(t, h)
    }

    fn sweep(&self, t: f64, h: [f64; 2]) -> Result<f64> {
        let (c1, c2) = (&self.conjugates[0], &self.conjugates[1]);
        let mut best = f64::NEG_INFINITY;
        let mut best_z = [0.0, 0.0];
        let mut j = 0usize;
        let line = |j: usize, p: f64| c2.node(j) * p - c2.values[j];
        for i in 0..c1.len() {
            let a = c1.values[i];
            if !a.is_finite() {
                break;
            }
            let z1 = c1.node(i);
            let p = h[1] + t * z1;
            while j + 1 < c2.len() && c2.values[j + 1].is_finite() && line(j + 1, p) >= line(j, p) {
                j += 1;
            }
            let v = z1 * h[0] - a + line(j, p);
            if v > best {
                best = v;
                best_z = [z1, c2.node(j)];
            }
        }
        self.refine(t, &h, &mut best_z, best)
    }

    /// [`Self::evaluate_2d`] on every grid point.
    pub fn field(&self, grid: &GridSpec3) -> Result<ScalarField3> {
        if self.d != 2 {
            return Err(Error::InvalidConfig("grid evaluation needs d = 2".into()));
        }
        grid.validate()?;
        let rows = try_map_indexed(grid.n_t * grid.n_h, |row| -> Result<Vec<f64>> {
            let (it, i1) = (row / grid.n_h, row % grid.n_h);
            let (t, h1) = (grid.t(it), grid.h(i1));
            (0..grid.n_h).map(|i2| self.sweep(t, [h1, grid.h(i2)])).collect()
        })?;
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        let mut provenance = Provenance::new("hopf");
        provenance.notes.push(format!(
            "dual grid {}x{}, primal extent {}",
            self.conjugates[0].len(),
            self.conjugates[1].len(),
            self.conjugates[0].primal().h_max
        ));
        ScalarField3::new(*grid, values, vec![0.0; grid.len()], provenance)
    }
}

/// `f(t, h)` for components `psis`, with the default dual resolution.
pub fn hopf_solve(psis: &[ConvexFn1D], t: f64, h: &[f64]) -> Result<f64> {
    HopfSolution::new(psis, DEFAULT_DUAL_POINTS)?.evaluate(t, h)
}

/// `f` on a grid for a two-dimensional initial condition.
pub fn hopf_field(ic: &InitialCondition, grid: &GridSpec3, n_dual: usize) -> Result<ScalarField3> {
    HopfSolution::from_initial(ic, grid.h_max, grid.t_max, DEFAULT_PRIMAL_POINTS, n_dual)?.field(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear(a: f64, h_max: f64) -> ConvexFn1D {
        ConvexFn1D::from_fn(h_max, 11, Tail::Linear, |y| a * y).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let z = ConvexFn1D::from_fn(5.0, 11, Tail::Linear, |_| 0.0).unwrap();
        let s = HopfSolution::new(&[z.clone(), z], 21).unwrap();
        for (t, h) in [(0.0, [0.0, 0.0]), (3.0, [1.0, 2.0])] {
            assert_eq!(s.evaluate(t, &h).unwrap(), 0.0);
        }
        let g = GridSpec3::cube(2.0, 5).unwrap();
        assert!(s.field(&g).unwrap().values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn plane_wave() {
        let psis = [linear(0.3, 4.0), linear(0.7, 4.0)];
        let v = hopf_solve(&psis, 2.0, &[1.0, 1.0]).unwrap();
        assert!((v - 1.42).abs() < 1e-8, "{v}");
        let s = HopfSolution::new(&psis, 17).unwrap();
        let g = GridSpec3::new(2.0, 1.0, 3, 3).unwrap();
        let f = s.field(&g).unwrap();
        assert!((f.at(2, 2, 2) - 1.42).abs() < 1e-8);
    }

    #[test]
    fn initial_slice_reproduces_spherical_data() {
        let ic = InitialCondition::Spherical { alpha: 1.0 };
        let s = HopfSolution::from_initial(&ic, 1.0, 1.0, 2001, 101).unwrap();
        let dz = s.dual_steps()[0];
        for h in [[0.0, 0.0], [0.3, 0.9], [1.0, 1.0]] {
            let f = s.evaluate(0.0, &h).unwrap();
            let psi = ic.value(h).unwrap();
            assert!((f - psi).abs() <= 2.0 * dz * h[0].max(h[1]) + 1e-6, "{h:?}");
        }
    }

    #[test]
    fn grid_and_pointwise_agree() {
        let ic = InitialCondition::Spherical { alpha: 1.0 };
        let s = HopfSolution::from_initial(&ic, 1.0, 1.0, 501, 61).unwrap();
        let g = GridSpec3::cube(1.0, 5).unwrap();
        let f = s.field(&g).unwrap();
        for k in 0..g.len() {
            let (t, h) = g.point(k);
            assert!((f.values[k] - s.evaluate(t, &h).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_data_reports_edge() {
        let ic = InitialCondition::Spherical { alpha: 1.0 };
        let s = HopfSolution::from_initial(&ic, 0.5, 0.0, 201, 41).unwrap();
        assert!(matches!(s.evaluate(0.0, &[10.0, 0.1]), Err(Error::EdgeAttained { .. })));
    }

    #[test]
    fn three_dimensional_plane_wave() {
        let psis = [linear(0.5, 3.0), linear(1.0, 3.0), linear(2.0, 3.0)];
        let v = HopfSolution::new(&psis, 9).unwrap().evaluate(1.5, &[1.0, 0.5, 0.25]).unwrap();
        assert!((v - (0.5 + 0.5 + 0.5 + 1.5)).abs() < 1e-10);
    }

    #[test]
    fn lipschitz_bound_for_two_dimensions() {
        let s = HopfSolution::new(&[linear(1.0, 2.0), linear(2.0, 2.0)], 5).unwrap();
        let l = 5f64.sqrt();
        assert!((s.lipschitz_bound() - l.max(l * l / 2.0)).abs() < 1e-12);
    }

    fn quadratic_like(c: f64, extent: f64) -> ConvexFn1D {
        ConvexFn1D::from_fn(extent, 201, Tail::Linear, |y| c * (y * y / (1.0 + y))).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn comparison_principle(c in 0.2f64..1.0, bump in 0.0f64..0.5, t in 0.0f64..1.0,
                                h1 in 0.0f64..1.0, h2 in 0.0f64..1.0) {
            // ψ ≤ ψ' pointwise gives f ≤ f'.
            let lo = [quadratic_like(c, 4.0), quadratic_like(c, 4.0)];
            let hi = [quadratic_like(c, 4.0),
                      ConvexFn1D::from_fn(4.0, 201, Tail::Linear, |y| c * y * y / (1.0 + y) + bump * y).unwrap()];
            let f = HopfSolution::new(&lo, 81).unwrap().evaluate(t, &[h1, h2]).unwrap();
            let g = HopfSolution::new(&hi, 81).unwrap().evaluate(t, &[h1, h2]).unwrap();
            prop_assert!(f <= g + 1e-10);
        }

        #[test]
        fn convex_along_segments(t in 0.0f64..1.0, a in prop::array::uniform2(0.0f64..1.5),
                                 b in prop::array::uniform2(0.0f64..1.5)) {
            let s = HopfSolution::new(&[quadratic_like(1.0, 4.0), quadratic_like(0.5, 4.0)], 81).unwrap();
            let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let fa = s.evaluate(t, &a).unwrap();
            let fb = s.evaluate(t, &b).unwrap();
            let fm = s.evaluate(t, &mid).unwrap();
            prop_assert!(fm <= 0.5 * (fa + fb) + 1e-9);
        }
    }
}
