//! Replica overlaps `⟨x·x'⟩`, `⟨y·y'⟩`, `⟨(x·x')(y·y')⟩` and their planted
//! counterparts, per disorder draw and averaged over disorder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sample_disorder, Disorder, ModelConfig, PriorSpec};
use crate::parallel::try_map_indexed;
use crate::rng::{chain_stream, replica_seed};
use crate::stats::mean_se;

use super::exact::Enumerator;
use super::mcmc::{GibbsChain, McmcParams};

/// How Gibbs averages are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Exact,
    Mcmc(McmcParams),
}

/// Gibbs averages for one disorder draw (unnormalized).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplicaOverlaps {
    /// `⟨x·x'⟩`.
    pub xx: f64,
    /// `⟨y·y'⟩`.
    pub yy: f64,
    /// `⟨(x·x')(y·y')⟩`.
    pub xxyy: f64,
    /// `⟨x·X⟩`.
    pub x_planted: f64,
    /// `⟨y·Y⟩`.
    pub y_planted: f64,
    /// `⟨(x·X)(y·Y)⟩`.
    pub xy_planted: f64,
}

/// Overlaps for one disorder draw.
pub fn overlaps_for_disorder(
    config: &ModelConfig,
    prior: &PriorSpec,
    disorder: &Disorder,
    t: f64,
    h: [f64; 2],
    sampler: &Sampler,
    chain_seed: u64,
) -> Result<ReplicaOverlaps> {
    match sampler {
        Sampler::Exact => {
            let mo = Enumerator::new(config, prior, disorder)?.moments(t, h);
            Ok(ReplicaOverlaps {
                xx: mo.overlap_x(),
                yy: mo.overlap_y(),
                xxyy: mo.overlap_xy(),
                x_planted: mo.x_dot(&disorder.x),
                y_planted: mo.y_dot(&disorder.y),
                xy_planted: mo.xy_dot(&disorder.x, &disorder.y),
            })
        }
        Sampler::Mcmc(params) => {
            params.validate()?;
            let mut a = GibbsChain::new(config, prior, disorder, t, h, chain_stream(chain_seed, 0))?;
            let mut b = GibbsChain::new(config, prior, disorder, t, h, chain_stream(chain_seed, 1))?;
            a.tune(params.burn_in, params.target_acceptance);
            b.tune(params.burn_in, params.target_acceptance);
            let mut acc = ReplicaOverlaps::default();
            for _ in 0..params.samples {
                for _ in 0..params.thin {
                    a.sweep();
                    b.sweep();
                }
                let xx = dot(a.x(), b.x());
                let yy = dot(a.y(), b.y());
                acc.xx += xx;
                acc.yy += yy;
                acc.xxyy += xx * yy;
                for c in [&a, &b] {
                    let px = dot(c.x(), &disorder.x);
                    let py = dot(c.y(), &disorder.y);
                    acc.x_planted += 0.5 * px;
                    acc.y_planted += 0.5 * py;
                    acc.xy_planted += 0.5 * px * py;
                }
            }
            a.check_diagnostics()?;
            b.check_diagnostics()?;
            let s = params.samples as f64;
            Ok(ReplicaOverlaps {
                xx: acc.xx / s,
                yy: acc.yy / s,
                xxyy: acc.xxyy / s,
                x_planted: acc.x_planted / s,
                y_planted: acc.y_planted / s,
                xy_planted: acc.xy_planted / s,
            })
        }
    }
}

/// Overlaps for replicas `0..n_disorder` with seeds `seed ^ r`.
pub fn replica_overlaps(
    config: &ModelConfig,
    prior: &PriorSpec,
    t: f64,
    h: [f64; 2],
    n_disorder: usize,
    seed: u64,
    sampler: &Sampler,
) -> Result<Vec<ReplicaOverlaps>> {
    if n_disorder == 0 {
        return Err(Error::InvalidConfig("n_disorder must be positive".into()));
    }
    try_map_indexed(n_disorder, |r| {
        let s = replica_seed(seed, r);
        let d = sample_disorder(config, prior, s)?;
        overlaps_for_disorder(config, prior, &d, t, h, sampler, s)
    })
}

/// Disorder-averaged overlaps.
///
/// `qx = E⟨x·x'⟩/N` and `qy = E⟨y·y'⟩/N` estimate `∂_{h₁}F̄_n` and
/// `∂_{h₂}F̄_n`; `qxy = E⟨(x·x')(y·y')⟩/N²` estimates `∂ₜF̄_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapStats {
    pub qx: f64,
    pub qy: f64,
    pub qxy: f64,
    pub se_qx: f64,
    pub se_qy: f64,
    pub se_qxy: f64,
    pub raw_xx: f64,
    pub raw_yy: f64,
    pub raw_xxyy: f64,
    pub n_disorder: usize,
}

impl OverlapStats {
    pub fn from_replicas(replicas: &[ReplicaOverlaps], big_n: f64) -> Self {
        let col = |f: fn(&ReplicaOverlaps) -> f64| {
            let v: Vec<f64> = replicas.iter().map(f).collect();
            mean_se(&v)
        };
        let (xx, se_xx) = col(|r| r.xx);
        let (yy, se_yy) = col(|r| r.yy);
        let (xxyy, se_xxyy) = col(|r| r.xxyy);
        OverlapStats {
            qx: xx / big_n,
            qy: yy / big_n,
            qxy: xxyy / (big_n * big_n),
            se_qx: se_xx / big_n,
            se_qy: se_yy / big_n,
            se_qxy: se_xxyy / (big_n * big_n),
            raw_xx: xx,
            raw_yy: yy,
            raw_xxyy: xxyy,
            n_disorder: replicas.len(),
        }
    }
}

/// Disorder-averaged overlap statistics at `(t, h)`.
pub fn gibbs_overlaps(
    config: &ModelConfig,
    prior: &PriorSpec,
    t: f64,
    h: [f64; 2],
    n_disorder: usize,
    seed: u64,
    sampler: &Sampler,
) -> Result<OverlapStats> {
    let reps = replica_overlaps(config, prior, t, h, n_disorder, seed, sampler)?;
    Ok(OverlapStats::from_replicas(&reps, config.big_n()))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_measure_has_no_overlap() {
        let c = ModelConfig::new(4, 1.0).unwrap();
        let s = gibbs_overlaps(&c, &PriorSpec::rademacher(), 0.0, [0.0, 0.0], 50, 1, &Sampler::Exact)
            .unwrap();
        assert!(s.qx.abs() < 1e-15 && s.qy.abs() < 1e-15 && s.qxy.abs() < 1e-15);
        let mc = Sampler::Mcmc(McmcParams {
            burn_in: 50,
            samples: 200,
            thin: 2,
            ..Default::default()
        });
        let s = gibbs_overlaps(&c, &PriorSpec::spherical(), 0.0, [0.0, 0.0], 20, 1, &mc).unwrap();
        assert!(s.qx.abs() < 3.0 * s.se_qx.max(1e-3));
    }

    #[test]
    fn mcmc_matches_exact_overlaps() {
        let c = ModelConfig::new(3, 1.0).unwrap();
        let prior = PriorSpec::rademacher();
        let mc = Sampler::Mcmc(McmcParams {
            burn_in: 100,
            samples: 4000,
            thin: 1,
            ..Default::default()
        });
        let (t, h) = (1.2, [0.4, 0.6]);
        let ex = replica_overlaps(&c, &prior, t, h, 20, 4, &Sampler::Exact).unwrap();
        let mm = replica_overlaps(&c, &prior, t, h, 20, 4, &mc).unwrap();
        for (a, b) in ex.iter().zip(&mm) {
            assert!((a.xx - b.xx).abs() < 0.25, "{a:?} {b:?}");
            assert!((a.xxyy - b.xxyy).abs() < 0.6);
            assert!((a.x_planted - b.x_planted).abs() < 0.15);
        }
    }

    #[test]
    fn overlaps_nonnegative() {
        let c = ModelConfig::new(3, 1.0).unwrap();
        for (t, h) in [(0.3, [0.1, 0.9]), (1.0, [1.0, 0.0])] {
            let s = gibbs_overlaps(&c, &PriorSpec::rademacher(), t, h, 30, 2, &Sampler::Exact).unwrap();
            assert!(s.qx >= 0.0 && s.qy >= 0.0 && s.qxy >= 0.0);
        }
    }
}
