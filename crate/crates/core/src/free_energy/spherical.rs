//! Decoupled free energy for the uniform measure on `√k·S^{k−1}`.
//!
//! For `b ∈ ℝ^k`, `∫ e^{b·x} dU_k(x) = A_k(√k·|b|)` with
//! `A_k(κ) = Γ(k/2)(2/κ)^ν I_ν(κ) = Σ_j Π_{i≤j} (κ²/4)/(i(i+ν))`, `ν = k/2 − 1`.
//! The series has positive terms, so it is summed directly with rescaling.

use std::sync::{Arc, OnceLock};

use crate::quadrature::{panel_rule, shared_gamma_rule, NormalRule};

/// Order of the generalized Gauss–Laguerre rule for the transverse radius.
pub const RADIAL_ORDER: usize = 64;

/// `log ∫ e^{κ s} dν_k(s)` where `s` is the first coordinate of a uniform
/// point on the unit sphere `S^{k−1}`.
pub fn log_sphere_mgf(dim: usize, kappa: f64) -> f64 {
    assert!(dim >= 1, "sphere dimension must be positive");
    let nu = dim as f64 / 2.0 - 1.0;
    let q = 0.25 * kappa * kappa;
    if q == 0.0 {
        return 0.0;
    }
    const RESCALE: f64 = 1e250;
    let mut log_scale = 0.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = 0.0f64;
    loop {
        j += 1.0;
        let denom = j * (j + nu);
        term *= q / denom;
        sum += term;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            log_scale += RESCALE.ln();
        }
        if denom > q && term <= sum * 1e-17 {
            break;
        }
    }
    log_scale + sum.ln()
}

/// `log ∫ e^{b·x} dU_k(x)` for the sphere of radius `√k`.
pub fn log_sphere_integral(b: &[f64]) -> f64 {
    let k = b.len();
    let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    log_sphere_mgf(k, (k as f64).sqrt() * norm)
}

/// `log ∫ exp(√(2h) u·x + 2h a·x − h|x|²) dU_k(x)` for one draw of `(a, u)`.
pub fn spherical_side_log_partition(h: f64, planted: &[f64], noise: &[f64]) -> f64 {
    let s = (2.0 * h).sqrt();
    let b: Vec<f64> = planted
        .iter()
        .zip(noise)
        .map(|(&a, &u)| s * u + 2.0 * h * a)
        .collect();
    -h * planted.len() as f64 + log_sphere_integral(&b)
}

/// `(1/k) E log ∫ exp(√(2h) U·x + 2h X·x − h|x|²) dU_k(x)` with `X ~ U_k`,
/// `U ~ N(0, I_k)`.
///
/// By rotation invariance `X = √k e₁`, so `|b|² = (√(2h)G + 2h√k)² + 4hR`
/// with `G ~ N(0,1)` and `R ~ Gamma((k−1)/2)` independent; the expectation is
/// a two-dimensional Gauss–Hermite × Gauss–Laguerre sum.
pub fn spherical_per_coordinate(dim: usize, h: f64) -> f64 {
    if dim == 1 {
        spherical_per_coordinate_with(dim, h, &panel_rule(), RADIAL_ORDER)
    } else {
        spherical_per_coordinate_with(dim, h, &coarse_panel_rule(), RADIAL_ORDER)
    }
}

/// For `k ≥ 2` the transverse radius smooths the integrand in `G`, so a
/// coarser composite rule suffices.
fn coarse_panel_rule() -> Arc<NormalRule> {
    static RULE: OnceLock<Arc<NormalRule>> = OnceLock::new();
    RULE.get_or_init(|| Arc::new(NormalRule::composite(8, 64, 12.0)))
        .clone()
}

pub(crate) fn spherical_per_coordinate_with(
    dim: usize,
    h: f64,
    normal: &NormalRule,
    radial_order: usize,
) -> f64 {
    assert!(dim >= 1, "sphere dimension must be positive");
    if h == 0.0 {
        return 0.0;
    }
    let k = dim as f64;
    let s = (2.0 * h).sqrt();
    let shift = 2.0 * h * k.sqrt();
    let expectation = if dim == 1 {
        normal.expect(|g| log_sphere_mgf(1, (s * g + shift).abs()))
    } else {
        let radial = shared_gamma_rule(radial_order, 0.5 * (k - 1.0));
        normal.expect(|g| {
            let along = (s * g + shift).powi(2);
            radial
                .iter()
                .map(|&(r, w)| w * log_sphere_mgf(dim, (k * (along + 4.0 * h * r)).sqrt()))
                .sum::<f64>()
        })
    };
    -h + expectation / k
}

/// Large-dimension limit `h − ½ log(1 + 2h)` of [`spherical_per_coordinate`].
pub fn spherical_limit(h: f64) -> f64 {
    h - 0.5 * (2.0 * h).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SidePrior;
    use crate::quadrature::legendre;
    use crate::rng::stream;
    use crate::stats::mean_se;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn one_dimensional_sphere_is_two_points() {
        for kappa in [0.0f64, 0.3, 2.0, 40.0, 800.0] {
            let exact = kappa + (-2.0 * kappa).exp().ln_1p() - std::f64::consts::LN_2;
            assert!((log_sphere_mgf(1, kappa) - exact).abs() < 1e-12 * exact.max(1.0));
        }
    }

    #[test]
    fn three_dimensional_sphere_is_sinhc() {
        // The first coordinate of a uniform point on S² is uniform on [−1, 1].
        for kappa in [1e-3f64, 0.5, 3.0, 30.0, 600.0] {
            let exact = kappa + (-(-2.0 * kappa).exp_m1() / (2.0 * kappa)).ln();
            let got = log_sphere_mgf(3, kappa);
            assert!((got - exact).abs() < 1e-12 * exact.abs().max(1.0), "{got} {exact}");
        }
    }

    #[test]
    fn two_dimensional_sphere_matches_angle_integral() {
        // (1/π) ∫₀^π e^{κ cos θ} dθ by composite Gauss–Legendre.
        for kappa in [0.2, 4.0, 25.0] {
            let mut total = 0.0;
            let pieces = 40;
            for p in 0..pieces {
                let a = std::f64::consts::PI * p as f64 / pieces as f64;
                let b = std::f64::consts::PI * (p + 1) as f64 / pieces as f64;
                for (x, w) in legendre(20, a, b) {
                    total += w * (kappa * (x.cos() - 1.0)).exp();
                }
            }
            let exact = kappa + (total / std::f64::consts::PI).ln();
            assert!((log_sphere_mgf(2, kappa) - exact).abs() < 1e-12 * exact.max(1.0));
        }
    }

    #[test]
    fn quadrature_matches_monte_carlo() {
        let mut rng = stream(77);
        for (dim, h) in [(1usize, 0.7), (3, 0.4), (8, 1.3)] {
            let values: Vec<f64> = (0..20_000)
                .map(|_| {
                    let x = SidePrior::Spherical.sample(dim, &mut rng).unwrap();
                    let u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    spherical_side_log_partition(h, &x, &u) / dim as f64
                })
                .collect();
            let (mu, se) = mean_se(&values);
            let quad = spherical_per_coordinate(dim, h);
            assert!((mu - quad).abs() < 4.0 * se, "dim {dim}: {mu} ± {se} vs {quad}");
        }
    }

    #[test]
    fn quadrature_orders_converged() {
        let fine = NormalRule::composite(10, 420, 13.0);
        for dim in [1usize, 2, 8, 32] {
            for h in [0.1, 1.0, 4.0] {
                let a = spherical_per_coordinate(dim, h);
                let b = spherical_per_coordinate_with(dim, h, &fine, 96);
                assert!((a - b).abs() < 1e-10, "dim {dim} h {h}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn approaches_gaussian_limit() {
        let h = 0.8;
        let gaps: Vec<f64> = [16usize, 64, 256]
            .iter()
            .map(|&k| (spherical_per_coordinate(k, h) - spherical_limit(h)).abs())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
        assert!(gaps[2] < 0.02);
    }
}
