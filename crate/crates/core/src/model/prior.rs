use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prior on one side of the rank-one signal (the `X` side or the `Y` side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SidePrior {
    /// Independent coordinates drawn from a finite distribution on `[-1, 1]`.
    /// Each atom is `(value, weight)`.
    IidDiscrete { atoms: Vec<(f64, f64)> },
    /// Uniform measure on the centered sphere of radius `sqrt(dim)`.
    Spherical,
}

impl SidePrior {
    pub fn rademacher() -> Self {
        SidePrior::IidDiscrete {
            atoms: vec![(-1.0, 0.5), (1.0, 0.5)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SidePrior::IidDiscrete { atoms } = self {
            if atoms.is_empty() {
                return Err(Error::InvalidConfig("discrete prior without atoms".into()));
            }
            let mut total = 0.0;
            for &(value, weight) in atoms {
                if !(-1.0..=1.0).contains(&value) {
                    return Err(Error::InvalidConfig(format!(
                        "atom value {value} outside [-1, 1]"
                    )));
                }
                if !(weight > 0.0) || !weight.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "atom weight {weight} is not positive"
                    )));
                }
                total += weight;
            }
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "atom weights sum to {total}, expected 1"
                )));
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> Option<&[(f64, f64)]> {
        match self {
            SidePrior::IidDiscrete { atoms } => Some(atoms),
            SidePrior::Spherical => None,
        }
    }

    pub fn is_centered(&self) -> bool {
        match self {
            SidePrior::IidDiscrete { atoms } => {
                atoms.iter().map(|&(v, w)| v * w).sum::<f64>().abs() < 1e-12
            }
            SidePrior::Spherical => true,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            SidePrior::IidDiscrete { atoms } => Ok((0..dim)
                .map(|_| {
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    for &(value, weight) in atoms {
                        acc += weight;
                        if u < acc {
                            return value;
                        }
                    }
                    atoms[atoms.len() - 1].0
                })
                .collect()),
            SidePrior::Spherical => {
                if dim == 0 {
                    return Err(Error::InvalidConfig(
                        "spherical prior needs a positive dimension".into(),
                    ));
                }
                let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                project_to_sphere(&mut x);
                Ok(x)
            }
        }
    }
}

/// Rescales `x` onto the sphere of radius `sqrt(len)`.
pub(crate) fn project_to_sphere(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = (x.len() as f64).sqrt() / norm;
    x.iter_mut().for_each(|v| *v *= scale);
}

/// Product prior: an `X`-side prior on `ℝ^m` and a `Y`-side prior on `ℝ^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub x: SidePrior,
    pub y: SidePrior,
}

impl PriorSpec {
    pub fn new(x: SidePrior, y: SidePrior) -> Self {
        PriorSpec { x, y }
    }

    pub fn symmetric(side: SidePrior) -> Self {
        PriorSpec {
            x: side.clone(),
            y: side,
        }
    }

    pub fn rademacher() -> Self {
        Self::symmetric(SidePrior::rademacher())
    }

    pub fn spherical() -> Self {
        Self::symmetric(SidePrior::Spherical)
    }

    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()
    }

    pub fn is_discrete(&self) -> bool {
        self.x.atoms().is_some() && self.y.atoms().is_some()
    }

    pub fn is_centered(&self) -> bool {
        self.x.is_centered() && self.y.is_centered()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn rejects_bad_atoms() {
        let bad_value = SidePrior::IidDiscrete {
            atoms: vec![(1.5, 1.0)],
        };
        assert!(bad_value.validate().is_err());
        let bad_weight = SidePrior::IidDiscrete {
            atoms: vec![(1.0, 0.7), (-1.0, 0.2)],
        };
        assert!(bad_weight.validate().is_err());
        let zero_weight = SidePrior::IidDiscrete {
            atoms: vec![(1.0, 1.0), (-1.0, 0.0)],
        };
        assert!(zero_weight.validate().is_err());
        assert!(SidePrior::rademacher().validate().is_ok());
    }

    #[test]
    fn spherical_samples_lie_on_sphere() {
        let mut rng = rng::stream(11);
        for dim in [1, 2, 16, 200] {
            let x = SidePrior::Spherical.sample(dim, &mut rng).unwrap();
            let sq: f64 = x.iter().map(|v| v * v).sum();
            assert!((sq - dim as f64).abs() <= 1e-9 * dim as f64);
        }
        assert!(SidePrior::Spherical.sample(0, &mut rng).is_err());
    }

    #[test]
    fn json_schema_round_trip() {
        let json = r#"{"kind":"iid_discrete","atoms":[[-1.0,0.5],[1.0,0.5]]}"#;
        let p: SidePrior = serde_json::from_str(json).unwrap();
        assert_eq!(p, SidePrior::rademacher());
        let s: SidePrior = serde_json::from_str(r#"{"kind":"spherical"}"#).unwrap();
        assert_eq!(s, SidePrior::Spherical);
    }
}
