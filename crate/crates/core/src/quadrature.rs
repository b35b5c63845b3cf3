//! Quadrature rules used throughout the crate.
//!
//! Gaussian expectations use Gauss–Hermite rules rescaled to the standard
//! normal density; `t`-integrals use Gauss–Legendre; expectations over a
//! chi-square radius use generalized Gauss–Laguerre.

use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::hermite::GaussHermite;
use gauss_quad::laguerre::GaussLaguerre;
use gauss_quad::legendre::GaussLegendre;

/// Default Gauss–Hermite order for one-dimensional Gaussian expectations.
pub const HERMITE_ORDER: usize = 64;

/// Nodes and weights for `E f(G)` with `G ~ N(0, 1)`.
#[derive(Debug, Clone)]
pub struct NormalRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NormalRule {
    pub fn new(order: usize) -> Self {
        let rule = GaussHermite::new(nonzero(order));
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let (nodes, weights) = rule
            .iter()
            .map(|(x, w)| (x * std::f64::consts::SQRT_2, w / sqrt_pi))
            .unzip();
        NormalRule { nodes, weights }
    }

    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&g, &w)| w * f(g))
            .sum()
    }
}

impl NormalRule {
    /// Composite Gauss–Legendre rule for `E f(G)` on `[−half_width, half_width]`
    /// with `panels` equal panels of `order` points each. Unlike Gauss–Hermite
    /// it resolves integrands with sharp bends, such as `log cosh(aG + b)`
    /// for large `a`.
    pub fn composite(order: usize, panels: usize, half_width: f64) -> Self {
        let width = 2.0 * half_width / panels as f64;
        let inv_sqrt_2pi = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let mut nodes = Vec::with_capacity(order * panels);
        let mut weights = Vec::with_capacity(order * panels);
        let base = legendre(order, 0.0, width);
        for p in 0..panels {
            let a = -half_width + p as f64 * width;
            for &(dx, w) in &base {
                let x = a + dx;
                nodes.push(x);
                weights.push(w * inv_sqrt_2pi * (-0.5 * x * x).exp());
            }
        }
        NormalRule { nodes, weights }
    }
}

/// Shared composite rule used for scalar-channel expectations.
pub fn panel_rule() -> Arc<NormalRule> {
    static RULE: OnceLock<Arc<NormalRule>> = OnceLock::new();
    RULE.get_or_init(|| Arc::new(NormalRule::composite(8, PANELS, 12.0)))
        .clone()
}

/// Panel count of [`panel_rule`].
pub const PANELS: usize = 320;

/// Shared standard-normal rule of the given order.
pub fn normal_rule(order: usize) -> Arc<NormalRule> {
    static CACHE: OnceLock<Mutex<Vec<(usize, Arc<NormalRule>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    if let Some((_, rule)) = guard.iter().find(|(o, _)| *o == order) {
        return rule.clone();
    }
    let rule = Arc::new(NormalRule::new(order));
    guard.push((order, rule.clone()));
    rule
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(nonzero(order));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Shape above which [`gamma_rule`] switches from Gauss–Laguerre to a
/// composite rule around the mode.
pub const LAGUERRE_MAX_SHAPE: f64 = 20.0;

/// Nodes and probability weights for `E f(R)` with `R ~ Gamma(shape, 1)`.
///
/// Small shapes use generalized Gauss–Laguerre, which absorbs the `r^{a−1}`
/// singularity at the origin. For large shapes the Laguerre weights lose
/// precision, and the concentrated density is integrated directly with
/// composite Gauss–Legendre over `a ± 14√a`; normalizing the weights removes
/// the need for `Γ(a)`.
pub fn gamma_rule(order: usize, shape: f64) -> Vec<(f64, f64)> {
    assert!(shape > 0.0, "gamma shape must be positive");
    let pairs: Vec<(f64, f64)> = if shape <= LAGUERRE_MAX_SHAPE {
        let alpha = (shape - 1.0)
            .try_into()
            .expect("gamma shape must be positive");
        let rule = GaussLaguerre::new(nonzero(order), alpha);
        rule.iter().map(|(x, w)| (*x, *w)).collect()
    } else {
        let a1 = shape - 1.0;
        let spread = 14.0 * shape.sqrt();
        let lo = (shape - spread).max(0.0);
        let hi = shape + spread;
        let panels = order.div_ceil(8).max(40);
        let width = (hi - lo) / panels as f64;
        let base = legendre(8, 0.0, width);
        let log_mode = a1 * a1.ln() - a1;
        (0..panels)
            .flat_map(|p| {
                let a = lo + p as f64 * width;
                base.iter()
                    .map(move |&(dx, w)| (a + dx, w))
                    .collect::<Vec<_>>()
            })
            .map(|(r, w)| (r, w * (a1 * r.ln() - r - log_mode).exp()))
            .collect()
    };
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    pairs.into_iter().map(|(x, w)| (x, w / total)).collect()
}

/// Shared gamma rule of the given order and shape.
pub fn shared_gamma_rule(order: usize, shape: f64) -> Arc<Vec<(f64, f64)>> {
    type Cache = Mutex<Vec<((usize, u64), Arc<Vec<(f64, f64)>>)>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let key = (order, shape.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    if let Some((_, rule)) = guard.iter().find(|(k, _)| *k == key) {
        return rule.clone();
    }
    let rule = Arc::new(gamma_rule(order, shape));
    guard.push((key, rule.clone()));
    rule
}

fn nonzero(order: usize) -> NonZeroUsize {
    NonZeroUsize::new(order).expect("quadrature order must be positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_moments() {
        let rule = normal_rule(HERMITE_ORDER);
        assert!((rule.expect(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!(rule.expect(|g| g).abs() < 1e-13);
        assert!((rule.expect(|g| g * g) - 1.0).abs() < 1e-12);
        assert!((rule.expect(|g| g.powi(4)) - 3.0).abs() < 1e-11);
        // E cos(G) = exp(-1/2)
        assert!((rule.expect(f64::cos) - (-0.5f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn order_64_matches_order_128() {
        let f = |g: f64| ((g + 1.0).cosh()).ln();
        let a = normal_rule(64).expect(f);
        let b = normal_rule(128).expect(f);
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn composite_rule_resolves_sharp_integrands() {
        let rule = panel_rule();
        assert!((rule.expect(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!((rule.expect(|g| g.powi(4)) - 3.0).abs() < 1e-12);
        // E|G| = sqrt(2/π)
        let abs = rule.expect(f64::abs);
        assert!((abs - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-13);
        let f = |g: f64| (3.0 * g + 4.5).cosh().ln();
        let fine = NormalRule::composite(12, 800, 13.0).expect(f);
        assert!((rule.expect(f) - fine).abs() < 1e-12);
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let rule = legendre(16, 0.0, 2.0);
        let integral: f64 = rule.iter().map(|(x, w)| w * x.powi(7)).sum();
        assert!((integral - 2f64.powi(8) / 8.0).abs() < 1e-11);
    }

    #[test]
    fn gamma_moments() {
        for shape in [0.5, 1.0, 3.5, 15.0, 20.5, 80.0, 1000.5] {
            let rule = gamma_rule(64, shape);
            let m1: f64 = rule.iter().map(|(x, w)| w * x).sum();
            let m2: f64 = rule.iter().map(|(x, w)| w * x * x).sum();
            assert!((m1 - shape).abs() < 1e-10 * shape.max(1.0));
            assert!((m2 - shape * (shape + 1.0)).abs() < 1e-9 * shape.max(1.0).powi(2));
        }
    }

    #[test]
    fn gamma_rules_agree_at_the_switch() {
        let f = |r: f64| (1.0 + r).ln() * (0.1 * r).cos();
        let a: f64 = gamma_rule(64, 20.0).iter().map(|&(r, w)| w * f(r)).sum();
        let composite = {
            // Same shape through the composite branch.
            let shape = 20.0f64;
            let a1 = shape - 1.0;
            let pairs: Vec<(f64, f64)> = legendre(400, 1e-9, 100.0)
                .into_iter()
                .map(|(r, w)| (r, w * (a1 * r.ln() - r - (a1 * a1.ln() - a1)).exp()))
                .collect();
            let total: f64 = pairs.iter().map(|p| p.1).sum();
            pairs.iter().map(|&(r, w)| w / total * f(r)).sum::<f64>()
        };
        assert!((a - composite).abs() < 1e-10, "{a} vs {composite}");
    }
}
