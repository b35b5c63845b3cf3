//! Limits `ψ(h) = lim F̄_n(0, h)` of the decoupled free energy.
//!
//! At `t = 0`, `F̄_n(0, h) = (m/N) φ_X(h₁) + (n/N) φ_Y(h₂)` with per-coordinate
//! values `φ`. Since `m/N = √(m/n) → √α` and `n/N → 1/√α`, the limit is
//! `√α φ_X(h₁) + φ_Y(h₂)/√α`, where for the sphere `φ` is replaced by its
//! large-dimension limit `h − ½ log(1 + 2h)`.

use crate::error::{Error, Result};
use crate::model::{PriorSpec, SidePrior};

use super::decoupled::discrete_per_coordinate;
use super::spherical::spherical_limit;

fn check_inputs(alpha: f64, h: [f64; 2]) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")));
    }
    if h.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidConfig(format!("h must lie in the closed orthant, got {h:?}")));
    }
    Ok(())
}

/// `(ψ₁(h₁), ψ₂(h₂))` for discrete i.i.d. priors.
pub fn psi_iid_parts(prior: &PriorSpec, alpha: f64, h: [f64; 2]) -> Result<(f64, f64)> {
    check_inputs(alpha, h)?;
    prior.validate()?;
    let atoms = |side: &SidePrior| -> Result<Vec<(f64, f64)>> {
        side.atoms().map(<[_]>::to_vec).ok_or_else(|| {
            Error::InvalidConfig("the i.i.d. initial condition needs discrete priors".into())
        })
    };
    let (ax, ay) = (atoms(&prior.x)?, atoms(&prior.y)?);
    let r = alpha.sqrt();
    Ok((
        r * discrete_per_coordinate(&ax, h[0]),
        discrete_per_coordinate(&ay, h[1]) / r,
    ))
}

/// `ψ(h) = √α φ_X(h₁) + φ_Y(h₂)/√α` for discrete i.i.d. priors.
pub fn psi_iid(prior: &PriorSpec, alpha: f64, h: [f64; 2]) -> Result<f64> {
    psi_iid_parts(prior, alpha, h).map(|(a, b)| a + b)
}

/// `(ψ₁(h₁), ψ₂(h₂))` for the spherical prior.
pub fn psi_spherical_parts(alpha: f64, h: [f64; 2]) -> Result<(f64, f64)> {
    check_inputs(alpha, h)?;
    let r = alpha.sqrt();
    Ok((r * spherical_limit(h[0]), spherical_limit(h[1]) / r))
}

/// `ψ(h) = √α (h₁ − ½ log(1 + 2h₁)) + (h₂ − ½ log(1 + 2h₂))/√α`.
pub fn psi_spherical(alpha: f64, h: [f64; 2]) -> Result<f64> {
    psi_spherical_parts(alpha, h).map(|(a, b)| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_energy::decoupled::decoupled_mean;
    use crate::model::ModelConfig;
    use crate::quadrature::NormalRule;

    #[test]
    fn vanishes_at_origin() {
        assert_eq!(psi_iid(&PriorSpec::rademacher(), 1.7, [0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(psi_spherical(0.4, [0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn rademacher_value() {
        let rule = NormalRule::composite(10, 600, 13.0);
        let expected = -0.5 + rule.expect(|g| (g + 1.0).cosh().ln());
        let got = psi_iid(&PriorSpec::rademacher(), 1.0, [0.5, 0.0]).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn spherical_values() {
        let v = psi_spherical(1.0, [1.0, 1.0]).unwrap();
        assert!((v - (2.0 - 3f64.ln())).abs() < 1e-15);
        assert!((v - 0.901_388).abs() < 1e-6);
        let v = psi_spherical(2.0, [0.5, 0.0]).unwrap();
        assert!((v - 2f64.sqrt() * (0.5 - 0.5 * 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn spherical_is_the_limit_of_the_decoupled_free_energy() {
        // At α = 2 the prefactor is √α, not α.
        let h = [0.5, 0.8];
        let prior = PriorSpec::spherical();
        let psi = psi_spherical(2.0, h).unwrap();
        let gaps: Vec<f64> = [8usize, 32, 128]
            .iter()
            .map(|&n| {
                let c = ModelConfig::new(n, 2.0).unwrap();
                (decoupled_mean(&c, &prior, h).unwrap() - psi).abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 0.005);
        let scaled_by_alpha = 2.0 * spherical_limit(h[0]) + spherical_limit(h[1]) / 2.0;
        let c = ModelConfig::new(128, 2.0).unwrap();
        assert!((decoupled_mean(&c, &prior, h).unwrap() - scaled_by_alpha).abs() > 0.015);
    }

    #[test]
    fn iid_matches_decoupled_when_sizes_are_exact() {
        let prior = PriorSpec::rademacher();
        for n in [1usize, 4, 9] {
            let c = ModelConfig::new(n, 1.0).unwrap();
            for h in [[0.3, 0.9], [1.0, 0.0], [0.7, 0.7]] {
                let a = decoupled_mean(&c, &prior, h).unwrap();
                let b = psi_iid(&prior, 1.0, h).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
        // α = 4: m(n) = 4n exactly, so the limit is attained at every n.
        let c = ModelConfig::new(3, 4.0).unwrap();
        let a = decoupled_mean(&c, &prior, [0.4, 0.6]).unwrap();
        let b = psi_iid(&prior, 4.0, [0.4, 0.6]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn convex_nondecreasing_on_grid() {
        let tern = PriorSpec::symmetric(SidePrior::IidDiscrete {
            atoms: vec![(-1.0, 0.2), (0.0, 0.3), (1.0, 0.5)],
        });
        for prior in [PriorSpec::rademacher(), tern] {
            let hs: Vec<f64> = (0..41).map(|i| i as f64 * 0.1).collect();
            let vals: Vec<(f64, f64)> = hs
                .iter()
                .map(|&h| psi_iid_parts(&prior, 1.5, [h, h]).unwrap())
                .collect();
            for w in vals.windows(3) {
                for part in [|p: &(f64, f64)| p.0, |p: &(f64, f64)| p.1] {
                    assert!(part(&w[1]) >= part(&w[0]) - 1e-13);
                    assert!(part(&w[2]) - 2.0 * part(&w[1]) + part(&w[0]) >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(psi_spherical(0.0, [0.1, 0.1]).is_err());
        assert!(psi_iid(&PriorSpec::spherical(), 1.0, [0.1, 0.1]).is_err());
        assert!(psi_iid(&PriorSpec::rademacher(), 1.0, [-0.1, 0.1]).is_err());
    }
}
