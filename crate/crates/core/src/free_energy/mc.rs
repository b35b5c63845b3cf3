//! Disorder averages `F̄_n = E F_n` and per-replica free-energy fields.
//!
//! Each replica is one disorder draw with seed `seed ^ r`. Its free energy is
//! exact when the model is enumerable; otherwise it is obtained by
//! thermodynamic integration along `t` from the exact decoupled value:
//! `F_n(t,h) = F_n(0,h) + (1/N)∫₀ᵗ ⟨∂ₛH_n⟩ ds`. Under `s = T u²` the integrand
//! becomes `√(2T/N)⟨x·Wy⟩ + 2Tu⟨(2/N)(x·X)(y·Y) − |x|²|y|²/N⟩`, which is
//! smooth at `u = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{config_hash, GridSpec3, Provenance, ScalarField3};
use crate::model::{sample_disorder, Disorder, ModelConfig, PriorSpec};
use crate::parallel::try_map_indexed;
use crate::quadrature::legendre;
use crate::rng::{chain_stream, replica_seed};
use crate::stats::{column_mean_se, mean_se};

use super::decoupled::decoupled_disorder;
use super::exact::{is_enumerable, Enumerator};
use super::mcmc::{GibbsChain, McmcParams};

/// How a number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMethod {
    Enumeration,
    Quadrature,
    MonteCarlo,
}

/// A scalar estimate with its standard error.
///
/// `std_error` is the replica standard error of a disorder average; for a
/// single deterministic evaluation it is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub method: EstimateMethod,
}

/// Which inner evaluator to use for each replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    /// Enumeration when the model is enumerable, thermodynamic integration otherwise.
    #[default]
    Auto,
    Exact,
    /// Thermodynamic integration even when enumeration is possible.
    Integration,
}

impl Evaluator {
    fn resolve(self, config: &ModelConfig, prior: &PriorSpec) -> Result<bool> {
        let enumerable = is_enumerable(config, prior);
        match self {
            Evaluator::Auto => Ok(enumerable),
            Evaluator::Integration => Ok(false),
            Evaluator::Exact if enumerable => Ok(true),
            Evaluator::Exact => Err(Error::InvalidConfig(
                "exact evaluation requested for a model that cannot be enumerated".into(),
            )),
        }
    }
}

/// Gauss–Legendre nodes in `u` covering `[0, √(t_k/T)]` for every `t_k`,
/// split at each `u_k` so that partial sums give `F` at every requested time.
fn integration_nodes(times: &[f64], order: usize) -> (f64, Vec<(usize, f64, f64)>) {
    let t_end = times.iter().cloned().fold(0.0, f64::max);
    let mut nodes = Vec::new();
    let mut u_prev = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let u = (t / t_end).sqrt();
        if u > u_prev {
            for (x, w) in legendre(order, u_prev, u) {
                nodes.push((k, x, w));
            }
        }
        u_prev = u;
    }
    (t_end, nodes)
}

/// `F_n(t_k, h)` for nondecreasing `times` by thermodynamic integration on
/// one disorder draw. One chain is annealed along the path.
pub fn ti_path(
    config: &ModelConfig,
    prior: &PriorSpec,
    disorder: &Disorder,
    h: [f64; 2],
    times: &[f64],
    params: &McmcParams,
    chain_seed: u64,
) -> Result<Vec<f64>> {
    params.validate()?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidConfig("integration times must be nonnegative and sorted".into()));
    }
    let base = decoupled_disorder(config, prior, disorder, h);
    let (t_end, nodes) = integration_nodes(times, params.ti_order);
    if nodes.is_empty() {
        return Ok(vec![base; times.len()]);
    }
    let big_n = config.big_n();
    let coupling = (2.0 * t_end / big_n).sqrt();
    let mut chain = GibbsChain::new(config, prior, disorder, 0.0, h, chain_stream(chain_seed, 0))?;
    let mut increments = vec![0.0; times.len()];
    for &(k, u, w) in &nodes {
        chain.set_point(t_end * u * u, h)?;
        chain.tune(params.burn_in, params.target_acceptance);
        let (mut a, mut b) = (0.0, 0.0);
        chain.run(params, |c| {
            let (xwy, rest) = c.dh_dt_parts();
            a += xwy;
            b += rest;
        })?;
        let s = params.samples as f64;
        let integrand = coupling * a / s + 2.0 * t_end * u * b / s;
        increments[k] += w * integrand / big_n;
    }
    let mut out = Vec::with_capacity(times.len());
    let mut acc = base;
    for inc in increments {
        acc += inc;
        out.push(acc);
    }
    Ok(out)
}

/// `F̄_n(t, h)` averaged over `n_disorder` replicas.
#[allow(clippy::too_many_arguments)]
pub fn free_energy_mc(
    config: &ModelConfig,
    prior: &PriorSpec,
    t: f64,
    h: [f64; 2],
    n_disorder: usize,
    mcmc: &McmcParams,
    evaluator: Evaluator,
    seed: u64,
) -> Result<GibbsEstimate> {
    if n_disorder < 2 {
        return Err(Error::InvalidConfig("n_disorder must be at least 2".into()));
    }
    if !(t >= 0.0 && h[0] >= 0.0 && h[1] >= 0.0) {
        return Err(Error::InvalidConfig("t and h must be nonnegative".into()));
    }
    let exact = evaluator.resolve(config, prior)?;
    let values = try_map_indexed(n_disorder, |r| -> Result<f64> {
        let s = replica_seed(seed, r);
        let d = sample_disorder(config, prior, s)?;
        if exact {
            Ok(Enumerator::new(config, prior, &d)?.free_energy(t, h))
        } else if t == 0.0 {
            Ok(decoupled_disorder(config, prior, &d, h))
        } else {
            Ok(ti_path(config, prior, &d, h, &[t], mcmc, s)?[0])
        }
    })?;
    let (mean, std_error) = mean_se(&values);
    Ok(GibbsEstimate {
        mean,
        std_error,
        n_samples: n_disorder,
        method: if exact {
            EstimateMethod::Enumeration
        } else if t == 0.0 {
            EstimateMethod::Quadrature
        } else {
            EstimateMethod::MonteCarlo
        },
    })
}

/// Per-replica `F_n` on every point of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaFields {
    pub grid: GridSpec3,
    pub config: ModelConfig,
    pub prior: PriorSpec,
    pub seed: u64,
    pub method: EstimateMethod,
    /// Replicas `2k` and `2k + 1` are a draw and its noise-negated twin.
    #[serde(default)]
    pub antithetic: bool,
    /// `fields[r][k]` is replica `r` at grid index `k`.
    pub fields: Vec<Vec<f64>>,
}

impl ReplicaFields {
    pub fn compute(
        config: &ModelConfig,
        prior: &PriorSpec,
        grid: &GridSpec3,
        n_disorder: usize,
        seed: u64,
        mcmc: &McmcParams,
        evaluator: Evaluator,
    ) -> Result<Self> {
        Self::compute_impl(config, prior, grid, n_disorder, seed, mcmc, evaluator, false)
    }

    /// `n_pairs` draws each followed by its twin `(X, Y, −W, −U, −V)`.
    /// Averaging a pair cancels the part of `F_n` that is odd in the noise.
    pub fn compute_antithetic(
        config: &ModelConfig,
        prior: &PriorSpec,
        grid: &GridSpec3,
        n_pairs: usize,
        seed: u64,
        mcmc: &McmcParams,
        evaluator: Evaluator,
    ) -> Result<Self> {
        Self::compute_impl(config, prior, grid, n_pairs, seed, mcmc, evaluator, true)
    }

    #[allow(clippy::too_many_arguments)]
    fn compute_impl(
        config: &ModelConfig,
        prior: &PriorSpec,
        grid: &GridSpec3,
        draws: usize,
        seed: u64,
        mcmc: &McmcParams,
        evaluator: Evaluator,
        antithetic: bool,
    ) -> Result<Self> {
        grid.validate()?;
        config.validate()?;
        if draws == 0 {
            return Err(Error::InvalidConfig("n_disorder must be positive".into()));
        }
        let exact = evaluator.resolve(config, prior)?;
        let per_draw = if antithetic { 2 } else { 1 };
        let fields = try_map_indexed(draws * per_draw, |r| {
            let s = replica_seed(seed, r / per_draw);
            let mut d = sample_disorder(config, prior, s)?;
            if r % per_draw == 1 {
                d = d.antithetic();
            }
            replica_field(config, prior, &d, grid, exact, mcmc, s ^ (r % per_draw) as u64)
        })?;
        Ok(ReplicaFields {
            grid: *grid,
            config: *config,
            prior: prior.clone(),
            seed,
            method: if exact {
                EstimateMethod::Enumeration
            } else {
                EstimateMethod::MonteCarlo
            },
            antithetic,
            fields,
        })
    }

    /// Rows that are independent across the index: pair averages when
    /// antithetic, the replicas themselves otherwise.
    pub fn independent_rows(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        if !self.antithetic {
            return rows.to_vec();
        }
        rows.chunks(2)
            .map(|p| match p {
                [a, b] => a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect(),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect()
    }

    pub fn n_replicas(&self) -> usize {
        self.fields.len()
    }

    /// `F̄_n` with replica standard errors.
    pub fn mean_field(&self) -> Result<ScalarField3> {
        let (values, std_errors) = column_mean_se(&self.independent_rows(&self.fields));
        self.wrap(values, std_errors)
    }

    fn wrap(&self, values: Vec<f64>, std_errors: Vec<f64>) -> Result<ScalarField3> {
        let mut provenance = Provenance::new(match self.method {
            EstimateMethod::Enumeration => "enumeration",
            EstimateMethod::Quadrature => "quadrature",
            EstimateMethod::MonteCarlo => "thermodynamic-integration",
        });
        provenance.seeds = vec![self.seed];
        provenance.config_hash = config_hash(&(&self.config, &self.prior));
        provenance
            .notes
            .push(format!("{} disorder replicas, replica seed = seed ^ r", self.n_replicas()));
        if self.antithetic {
            provenance.notes.push("replicas come in antithetic pairs".into());
        }
        ScalarField3::new(self.grid, values, std_errors, provenance)
    }

    /// Per-replica `sup_grid |F_r − F̄|` against a supplied mean field.
    pub fn sup_deviations(&self, mean: &[f64]) -> Vec<f64> {
        self.fields
            .iter()
            .map(|f| {
                f.iter()
                    .zip(mean)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

fn replica_field(
    config: &ModelConfig,
    prior: &PriorSpec,
    disorder: &Disorder,
    grid: &GridSpec3,
    exact: bool,
    mcmc: &McmcParams,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; grid.len()];
    if exact {
        let e = Enumerator::new(config, prior, disorder)?;
        for (k, (t, h)) in grid.points().enumerate() {
            out[k] = e.free_energy(t, h);
        }
        return Ok(out);
    }
    let times = grid.t_axis();
    for i1 in 0..grid.n_h {
        for i2 in 0..grid.n_h {
            let h = [grid.h(i1), grid.h(i2)];
            let chain_seed = seed.wrapping_add(((i1 * grid.n_h + i2) as u64) << 32);
            let path = ti_path(config, prior, disorder, h, &times, mcmc, chain_seed)?;
            for (it, v) in path.into_iter().enumerate() {
                out[grid.index(it, i1, i2)] = v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_energy::psi::psi_spherical;
    use crate::free_energy::spherical::spherical_limit;

    #[test]
    fn origin_is_exactly_zero() {
        let c = ModelConfig::new(3, 1.0).unwrap();
        for prior in [PriorSpec::rademacher(), PriorSpec::spherical()] {
            let e = free_energy_mc(&c, &prior, 0.0, [0.0, 0.0], 4, &McmcParams::default(), Evaluator::Auto, 1)
                .unwrap();
            assert_eq!(e.mean, 0.0);
            assert_eq!(e.std_error, 0.0);
        }
    }

    #[test]
    fn integration_nodes_partition_the_path() {
        let (t_end, nodes) = integration_nodes(&[0.0, 0.25, 1.0], 4);
        assert_eq!(t_end, 1.0);
        assert_eq!(nodes.len(), 8);
        let seg1: f64 = nodes.iter().filter(|n| n.0 == 1).map(|n| n.2).sum();
        let seg2: f64 = nodes.iter().filter(|n| n.0 == 2).map(|n| n.2).sum();
        assert!((seg1 - 0.5).abs() < 1e-14 && (seg2 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn integration_matches_enumeration_per_disorder() {
        let c = ModelConfig::new(3, 1.0).unwrap();
        let prior = PriorSpec::rademacher();
        let params = McmcParams {
            burn_in: 200,
            samples: 2000,
            thin: 2,
            ti_order: 8,
            ..Default::default()
        };
        for seed in 0..3 {
            let d = sample_disorder(&c, &prior, seed).unwrap();
            let e = Enumerator::new(&c, &prior, &d).unwrap();
            let times = [0.3, 0.8];
            let path = ti_path(&c, &prior, &d, [0.2, 0.4], &times, &params, seed).unwrap();
            for (&t, v) in times.iter().zip(&path) {
                let exact = e.free_energy(t, [0.2, 0.4]);
                assert!((v - exact).abs() < 0.02, "t={t}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn disorder_average_matches_enumeration() {
        let c = ModelConfig::new(6, 1.0).unwrap();
        let prior = PriorSpec::rademacher();
        let (t, h) = (0.5, [0.3, 0.3]);
        let params = McmcParams {
            burn_in: 100,
            samples: 300,
            thin: 2,
            ti_order: 8,
            ..Default::default()
        };
        let n = 60;
        let mc = free_energy_mc(&c, &prior, t, h, n, &params, Evaluator::Integration, 11).unwrap();
        let ex = free_energy_mc(&c, &prior, t, h, n, &params, Evaluator::Exact, 11).unwrap();
        assert_eq!(mc.method, EstimateMethod::MonteCarlo);
        assert_eq!(ex.method, EstimateMethod::Enumeration);
        // Same disorder draws: the replica-paired difference is pure sampler error.
        let combined = (mc.std_error.powi(2) + ex.std_error.powi(2)).sqrt();
        assert!((mc.mean - ex.mean).abs() < 3.0 * combined, "{mc:?} vs {ex:?}");
    }

    #[test]
    fn spherical_decoupled_average() {
        let c = ModelConfig::new(24, 1.0).unwrap();
        let prior = PriorSpec::spherical();
        let e = free_energy_mc(&c, &prior, 0.0, [1.0, 0.0], 400, &McmcParams::default(), Evaluator::Auto, 3)
            .unwrap();
        let limit = spherical_limit(1.0);
        assert!((psi_spherical(1.0, [1.0, 0.0]).unwrap() - limit).abs() < 1e-15);
        // Interpolation bound: |gap| ≤ C h/√m; C = 2 is generous for h = 1.
        let slack = 3.0 * e.std_error + 2.0 / 24f64.sqrt();
        assert!((e.mean - limit).abs() < slack);
    }

    #[test]
    fn exact_request_on_spherical_is_rejected() {
        let c = ModelConfig::new(2, 1.0).unwrap();
        let err = free_energy_mc(&c, &PriorSpec::spherical(), 0.1, [0.1, 0.1], 2, &McmcParams::default(), Evaluator::Exact, 0);
        assert!(err.is_err());
    }

    #[test]
    fn replica_fields_are_reproducible() {
        let c = ModelConfig::new(3, 1.0).unwrap();
        let grid = GridSpec3::cube(1.0, 3).unwrap();
        let a = ReplicaFields::compute(&c, &PriorSpec::rademacher(), &grid, 5, 9, &McmcParams::default(), Evaluator::Auto)
            .unwrap();
        let b = ReplicaFields::compute(&c, &PriorSpec::rademacher(), &grid, 5, 9, &McmcParams::default(), Evaluator::Auto)
            .unwrap();
        assert_eq!(a, b);
        let mean = a.mean_field().unwrap();
        assert_eq!(mean.at(0, 0, 0), 0.0);
        assert!(a.sup_deviations(&mean.values).iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn antithetic_pairs_share_the_plain_draws() {
        let c = ModelConfig::new(3, 1.0).unwrap();
        let grid = GridSpec3::cube(1.0, 3).unwrap();
        let p = PriorSpec::rademacher();
        let plain = ReplicaFields::compute(&c, &p, &grid, 4, 9, &McmcParams::default(), Evaluator::Auto).unwrap();
        let anti = ReplicaFields::compute_antithetic(&c, &p, &grid, 4, 9, &McmcParams::default(), Evaluator::Auto).unwrap();
        assert_eq!(anti.n_replicas(), 8);
        for r in 0..4 {
            assert_eq!(anti.fields[2 * r], plain.fields[r]);
            let d = sample_disorder(&c, &p, replica_seed(9, r)).unwrap().antithetic();
            let e = Enumerator::new(&c, &p, &d).unwrap();
            let k = grid.index(2, 1, 2);
            let expected = e.free_energy(grid.t(2), [grid.h(1), grid.h(2)]);
            assert!((anti.fields[2 * r + 1][k] - expected).abs() < 1e-12);
        }
        assert_eq!(anti.independent_rows(&anti.fields).len(), 4);
    }
}
