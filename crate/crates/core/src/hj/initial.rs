//! Separable initial conditions `ψ(h) = ψ₁(h₁) + ψ₂(h₂)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_energy::psi::{psi_iid_parts, psi_spherical_parts};
use crate::model::{ModelFile, PriorSpec};

use super::convex::{ConvexFn1D, Tail};

/// A closed-form or sampled separable initial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Zero,
    Linear { a: [f64; 2] },
    /// `√α (h₁ − ½ log(1 + 2h₁)) + (h₂ − ½ log(1 + 2h₂))/√α`.
    Spherical { alpha: f64 },
    /// Limit of the decoupled free energy for discrete i.i.d. priors.
    Iid { prior: PriorSpec, alpha: f64 },
    /// Components sampled on uniform grids, continued linearly.
    Sampled { components: [ConvexFn1D; 2] },
}

impl InitialCondition {
    /// Parses `zero`, `linear:a1,a2`, `spherical:alpha` or `iid:<model.json>`
    /// (the model file supplies the prior and `α`).
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
        let bad = || Error::InvalidConfig(format!("cannot parse initial condition '{spec}'"));
        let ic = match name {
            "zero" => InitialCondition::Zero,
            "linear" => {
                let parts: Vec<f64> = arg
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad())?;
                match parts[..] {
                    [a1, a2] => InitialCondition::Linear { a: [a1, a2] },
                    _ => return Err(bad()),
                }
            }
            "spherical" => InitialCondition::Spherical {
                alpha: arg.trim().parse().map_err(|_| bad())?,
            },
            "iid" => {
                let file = ModelFile::from_json(&std::fs::read_to_string(arg.trim())?)?;
                InitialCondition::Iid {
                    prior: file.prior_spec(),
                    alpha: file.alpha,
                }
            }
            _ => return Err(bad()),
        };
        ic.validate()?;
        Ok(ic)
    }

    /// Reads sampled components from a CSV with columns `h, psi1, psi2` on
    /// a uniform grid starting at 0.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut rows: Vec<[f64; 3]> = Vec::new();
        for record in reader.records() {
            let record = record?;
            let mut row = [0.0; 3];
            for (i, slot) in row.iter_mut().enumerate() {
                *slot = record
                    .get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidConfig(format!("bad CSV field {i}")))?;
            }
            rows.push(row);
        }
        if rows.len() < 2 || rows[0][0] != 0.0 {
            return Err(Error::InvalidConfig("need at least two rows starting at h = 0".into()));
        }
        let h_max = rows[rows.len() - 1][0];
        let step = h_max / (rows.len() - 1) as f64;
        if rows
            .iter()
            .enumerate()
            .any(|(i, r)| (r[0] - i as f64 * step).abs() > 1e-9 * h_max.max(1.0))
        {
            return Err(Error::InvalidConfig("h column must be a uniform grid".into()));
        }
        let component = |c: usize| {
            ConvexFn1D::new(h_max, rows.iter().map(|r| r[c]).collect(), Tail::Linear)
        };
        Ok(InitialCondition::Sampled {
            components: [component(1)?, component(2)?],
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialCondition::Zero => Ok(()),
            InitialCondition::Linear { a } => {
                if a.iter().all(|v| *v >= 0.0 && v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "linear coefficients must be nonnegative, got {a:?}"
                    )))
                }
            }
            InitialCondition::Spherical { alpha } | InitialCondition::Iid { alpha, .. } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")));
                }
                if let InitialCondition::Iid { prior, .. } = self {
                    prior.validate()?;
                    if !prior.is_discrete() {
                        return Err(Error::InvalidConfig("iid initial condition needs discrete priors".into()));
                    }
                }
                Ok(())
            }
            InitialCondition::Sampled { components } => {
                if components.iter().all(|c| c.convexified) {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(
                        "sampled components must be convex and nondecreasing".into(),
                    ))
                }
            }
        }
    }

    /// `(ψ₁(h₁), ψ₂(h₂))`.
    pub fn parts(&self, h: [f64; 2]) -> Result<(f64, f64)> {
        match self {
            InitialCondition::Zero => Ok((0.0, 0.0)),
            InitialCondition::Linear { a } => Ok((a[0] * h[0], a[1] * h[1])),
            InitialCondition::Spherical { alpha } => psi_spherical_parts(*alpha, h),
            InitialCondition::Iid { prior, alpha } => psi_iid_parts(prior, *alpha, h),
            InitialCondition::Sampled { components } => {
                Ok((components[0].eval(h[0]), components[1].eval(h[1])))
            }
        }
    }

    pub fn value(&self, h: [f64; 2]) -> Result<f64> {
        self.parts(h).map(|(a, b)| a + b)
    }

    /// An upper bound on the slope of each component.
    pub fn slope_bounds(&self) -> [f64; 2] {
        match self {
            InitialCondition::Zero => [0.0, 0.0],
            InitialCondition::Linear { a } => *a,
            InitialCondition::Spherical { alpha } => [alpha.sqrt(), 1.0 / alpha.sqrt()],
            InitialCondition::Iid { prior, alpha } => {
                // φ'(h) = E|⟨x⟩|² per coordinate, at most the largest squared atom.
                let sq = |side: &crate::model::SidePrior| {
                    side.atoms()
                        .map(|a| a.iter().fold(0.0f64, |m, (v, _)| m.max(v * v)))
                        .unwrap_or(0.0)
                };
                [alpha.sqrt() * sq(&prior.x), sq(&prior.y) / alpha.sqrt()]
            }
            InitialCondition::Sampled { components } => {
                [components[0].last_slope().max(0.0), components[1].last_slope().max(0.0)]
            }
        }
    }

    /// Euclidean norm of [`Self::slope_bounds`], the Lipschitz constant of `ψ`.
    pub fn lipschitz(&self) -> f64 {
        let [a, b] = self.slope_bounds();
        a.hypot(b)
    }

    pub fn tail(&self) -> Tail {
        match self {
            InitialCondition::Spherical { .. } | InitialCondition::Iid { .. } => Tail::Truncated,
            _ => Tail::Linear,
        }
    }

    /// Primal extent needed to evaluate up to `h_max` at times up to `t_max`:
    /// characteristics reach `yᵢ = hᵢ + t z_j` with `z_j` below the slope bound.
    pub fn primal_extent(&self, h_max: f64, t_max: f64) -> f64 {
        let [a, b] = self.slope_bounds();
        h_max + t_max * a.max(b) + 1.0
    }

    /// Both components sampled at `n` points on `[0, extent]`.
    ///
    /// Closed forms are convexified after sampling, which only moves values
    /// by quadrature round-off.
    pub fn sample(&self, extent: f64, n: usize) -> Result<[ConvexFn1D; 2]> {
        self.validate()?;
        if let InitialCondition::Sampled { components } = self {
            if components.iter().any(|c| c.h_max < extent * (1.0 - 1e-12)) {
                return Err(Error::InvalidConfig(format!(
                    "sampled initial condition covers [0, {}], need [0, {extent}]",
                    components[0].h_max.min(components[1].h_max)
                )));
            }
        }
        let step = extent / (n.max(2) - 1) as f64;
        let mut first = Vec::with_capacity(n);
        let mut second = Vec::with_capacity(n);
        for i in 0..n.max(2) {
            let y = if i + 1 == n.max(2) { extent } else { i as f64 * step };
            let (a, b) = self.parts([y, y])?;
            first.push(a);
            second.push(b);
        }
        let make = |values: Vec<f64>| -> Result<ConvexFn1D> {
            let u = ConvexFn1D::new(extent, values, self.tail())?;
            Ok(if u.convexified { u } else { u.convexify() })
        };
        Ok([make(first)?, make(second)?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_closed_forms() {
        assert_eq!(InitialCondition::parse("zero").unwrap(), InitialCondition::Zero);
        assert_eq!(
            InitialCondition::parse("linear:0.3,0.7").unwrap(),
            InitialCondition::Linear { a: [0.3, 0.7] }
        );
        assert_eq!(
            InitialCondition::parse("spherical:1.5").unwrap(),
            InitialCondition::Spherical { alpha: 1.5 }
        );
        assert!(InitialCondition::parse("linear:0.3").is_err());
        assert!(InitialCondition::parse("linear:-1,2").is_err());
        assert!(InitialCondition::parse("cubic").is_err());
    }

    #[test]
    fn parses_iid_model_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(
            &path,
            r#"{"prior": {"kind": "iid_discrete", "atoms": [[-1, 0.5], [1, 0.5]]}, "alpha": 1.0, "n": 4}"#,
        )
        .unwrap();
        let ic = InitialCondition::parse(&format!("iid:{}", path.display())).unwrap();
        assert_eq!(ic.slope_bounds(), [1.0, 1.0]);
        let expected = crate::free_energy::psi_iid(&PriorSpec::rademacher(), 1.0, [0.5, 0.0]).unwrap();
        assert_eq!(ic.value([0.5, 0.0]).unwrap(), expected);
    }

    #[test]
    fn reads_sampled_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("psi.csv");
        std::fs::write(&path, "h,psi1,psi2\n0,0,0\n0.5,0.1,0.25\n1,0.3,0.5\n").unwrap();
        let ic = InitialCondition::from_csv(&path).unwrap();
        assert!((ic.value([0.75, 0.25]).unwrap() - (0.2 + 0.125)).abs() < 1e-15);
        let [a, b] = ic.slope_bounds();
        assert!((a - 0.4).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        assert!((ic.value([2.0, 0.0]).unwrap() - 0.7).abs() < 1e-15);
        std::fs::write(&path, "h,psi1,psi2\n0,0,0\n0.5,0.3,0\n1,0.4,0\n").unwrap();
        assert!(InitialCondition::from_csv(&path).unwrap().validate().is_err());
    }

    #[test]
    fn samples_are_convex() {
        for ic in [
            InitialCondition::Spherical { alpha: 1.0 },
            InitialCondition::Iid { prior: PriorSpec::rademacher(), alpha: 1.0 },
        ] {
            let [a, b] = ic.sample(3.0, 301).unwrap();
            assert!(a.convexified && b.convexified);
            assert_eq!(a.tail, Tail::Truncated);
            assert!(a.last_slope() < ic.slope_bounds()[0]);
        }
    }
}
