//! The free energy at `t = 0`, where the two sides decouple.
//!
//! `F̄_n(0, h) = (m/N) φ_X(h₁) + (n/N) φ_Y(h₂)` with `φ` the per-coordinate
//! value of a scalar Gaussian channel (discrete priors) or the per-coordinate
//! sphere value (spherical priors).

use crate::error::{Error, Result};
use crate::model::{Disorder, ModelConfig, PriorSpec, SidePrior};
use crate::quadrature::{panel_rule, NormalRule};
use crate::stats::LogSumExp;

use super::spherical::{spherical_per_coordinate, spherical_side_log_partition};

/// `log Σ_v w_v exp(g v − h v²)`.
fn scalar_log_partition(atoms: &[(f64, f64)], g: f64, h: f64) -> f64 {
    let mut acc = LogSumExp::default();
    for &(v, w) in atoms {
        acc.push(w.ln() + g * v - h * v * v);
    }
    acc.value()
}

/// `E_{X,G} log ∫ exp(√(2h) G v + 2h X v − h v²) dP(v)` with `X ~ P`.
///
/// The Gaussian expectation uses the composite panel rule: the integrand
/// bends on a scale `1/√(2h)`, which a fixed-order Gauss–Hermite rule only
/// resolves to about `1e-9` at `h = 1`.
pub fn discrete_per_coordinate(atoms: &[(f64, f64)], h: f64) -> f64 {
    discrete_per_coordinate_with_rule(atoms, h, &panel_rule())
}

pub(crate) fn discrete_per_coordinate_with_rule(
    atoms: &[(f64, f64)],
    h: f64,
    rule: &NormalRule,
) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    let s = (2.0 * h).sqrt();
    atoms
        .iter()
        .map(|&(x, wx)| wx * rule.expect(|g| scalar_log_partition(atoms, s * g + 2.0 * h * x, h)))
        .sum()
}

/// Per-coordinate decoupled free energy of one side.
///
/// For a discrete prior this is the scalar-channel value and `dim` is only
/// validated; for the spherical prior it depends on the dimension.
pub fn free_energy_quadrature_decoupled(side: &SidePrior, h: f64, dim: usize) -> Result<f64> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(format!("h must be finite and nonnegative, got {h}")));
    }
    if dim == 0 {
        return Err(Error::InvalidConfig("dimension must be positive".into()));
    }
    side.validate()?;
    Ok(match side {
        SidePrior::IidDiscrete { atoms } => discrete_per_coordinate(atoms, h),
        SidePrior::Spherical => spherical_per_coordinate(dim, h),
    })
}

/// `F̄_n(0, h)` by quadrature.
pub fn decoupled_mean(config: &ModelConfig, prior: &PriorSpec, h: [f64; 2]) -> Result<f64> {
    let (m, n) = (config.m(), config.n);
    let big_n = config.big_n();
    let fx = free_energy_quadrature_decoupled(&prior.x, h[0], m)?;
    let fy = free_energy_quadrature_decoupled(&prior.y, h[1], n)?;
    Ok((m as f64 * fx + n as f64 * fy) / big_n)
}

/// `log ∫ exp(√(2h) u·x + 2h a·x − h|x|²) dP(x)` for one side and one draw.
pub fn side_log_partition(side: &SidePrior, h: f64, planted: &[f64], noise: &[f64]) -> f64 {
    match side {
        SidePrior::IidDiscrete { atoms } => {
            let s = (2.0 * h).sqrt();
            planted
                .iter()
                .zip(noise)
                .map(|(&a, &u)| scalar_log_partition(atoms, s * u + 2.0 * h * a, h))
                .sum()
        }
        SidePrior::Spherical => spherical_side_log_partition(h, planted, noise),
    }
}

/// `F_n(0, h)` for one disorder draw, for any supported prior.
pub fn decoupled_disorder(
    config: &ModelConfig,
    prior: &PriorSpec,
    disorder: &Disorder,
    h: [f64; 2],
) -> f64 {
    let lx = side_log_partition(&prior.x, h[0], &disorder.x, &disorder.u);
    let ly = side_log_partition(&prior.y, h[1], &disorder.y, &disorder.v);
    (lx + ly) / config.big_n()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_energy::exact::free_energy_exact;
    use crate::quadrature::{normal_rule, HERMITE_ORDER};
    use crate::model::sample_disorder;
    use crate::stats::mean_se;

    #[test]
    fn rademacher_closed_form() {
        let rule = NormalRule::composite(10, 600, 13.0);
        let expected = -0.5 + rule.expect(|g| crate::free_energy::exact::log_cosh(g + 1.0));
        let got = free_energy_quadrature_decoupled(&SidePrior::rademacher(), 0.5, 1).unwrap();
        assert!((got - expected).abs() < 1e-13);
        let hermite = -0.5 + normal_rule(HERMITE_ORDER).expect(|g| (g + 1.0).cosh().ln());
        assert!((got - hermite).abs() < 1e-9);
        let c = ModelConfig::new(1, 1.0).unwrap();
        let f = decoupled_mean(&c, &PriorSpec::rademacher(), [0.5, 0.0]).unwrap();
        assert!((f - got).abs() < 1e-15);
    }

    #[test]
    fn zero_field_is_zero() {
        let c = ModelConfig::new(5, 1.3).unwrap();
        assert_eq!(decoupled_mean(&c, &PriorSpec::rademacher(), [0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(decoupled_mean(&c, &PriorSpec::spherical(), [0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn panel_rule_converged() {
        let tern = vec![(-1.0, 0.25), (0.0, 0.25), (0.5, 0.5)];
        let fine = NormalRule::composite(12, 900, 13.0);
        let hermite = normal_rule(HERMITE_ORDER);
        for atoms in [SidePrior::rademacher().atoms().unwrap().to_vec(), tern] {
            for h in [0.05, 0.5, 1.0, 2.0, 6.0] {
                let a = discrete_per_coordinate(&atoms, h);
                let b = discrete_per_coordinate_with_rule(&atoms, h, &fine);
                assert!((a - b).abs() < 1e-12, "h={h}: {a} vs {b}");
                let c = discrete_per_coordinate_with_rule(&atoms, h, &hermite);
                assert!((a - c).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn matches_enumeration_average() {
        let c = ModelConfig::new(3, 1.0).unwrap();
        let prior = PriorSpec::rademacher();
        let h = [0.6, 0.3];
        let values: Vec<f64> = (0..4000)
            .map(|s| {
                let d = sample_disorder(&c, &prior, s).unwrap();
                free_energy_exact(&c, &prior, &d, 0.0, h).unwrap()
            })
            .collect();
        let (mu, se) = mean_se(&values);
        let quad = decoupled_mean(&c, &prior, h).unwrap();
        assert!((mu - quad).abs() < 4.0 * se);
    }

    #[test]
    fn per_disorder_matches_enumeration() {
        let c = ModelConfig::new(3, 1.4).unwrap();
        let prior = PriorSpec::new(
            SidePrior::IidDiscrete {
                atoms: vec![(-1.0, 0.3), (1.0, 0.7)],
            },
            SidePrior::rademacher(),
        );
        for s in 0..5 {
            let d = sample_disorder(&c, &prior, s).unwrap();
            let a = decoupled_disorder(&c, &prior, &d, [0.4, 0.9]);
            let b = free_energy_exact(&c, &prior, &d, 0.0, [0.4, 0.9]).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_negative_field() {
        assert!(free_energy_quadrature_decoupled(&SidePrior::rademacher(), -0.1, 1).is_err());
    }
}
