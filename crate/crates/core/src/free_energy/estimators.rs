//! Estimators of the two error terms in the convergence bound: the
//! concentration `K_{M,n}` and the initial-condition gap `L_{ψ,M,n}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec3;
use crate::model::{ModelConfig, PriorSpec};
use crate::stats::{column_mean_se, mean_se};

use super::decoupled::decoupled_mean;
use super::mc::{EstimateMethod, Evaluator, GibbsEstimate, ReplicaFields};
use super::mcmc::McmcParams;

/// `K_{M,n} = (E sup_grid |F_n − F̄_n|²)^{1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationEstimate {
    pub estimate: GibbsEstimate,
    /// Set when the mean field was computed from the same single replica,
    /// which makes the estimate identically zero.
    pub degenerate: bool,
    pub caveat: String,
}

/// `K` from stored replica fields, with `F̄` their mean.
pub fn estimate_k_from_fields(fields: &ReplicaFields) -> ConcentrationEstimate {
    let (mean, _) = column_mean_se(&fields.fields);
    let sq: Vec<Vec<f64>> = fields.sup_deviations(&mean).iter().map(|d| vec![d * d]).collect();
    let sq: Vec<f64> = fields.independent_rows(&sq).into_iter().map(|r| r[0]).collect();
    let (k2, se2) = mean_se(&sq);
    let k = k2.sqrt();
    let se = if k > 0.0 { se2 / (2.0 * k) } else { 0.0 };
    let degenerate = fields.n_replicas() < 2;
    let mut caveat = format!(
        "sup taken over the {}x{}x{} grid only; a lower bound on the sup over the cube",
        fields.grid.n_t, fields.grid.n_h, fields.grid.n_h
    );
    if degenerate {
        caveat.push_str("; single replica compared with itself, estimate is not meaningful");
    }
    ConcentrationEstimate {
        estimate: GibbsEstimate {
            mean: k,
            std_error: se,
            n_samples: fields.n_replicas(),
            method: fields.method,
        },
        degenerate,
        caveat,
    }
}

/// `K_{M,n}` over `grid` (normally a cube `[0, M]³`) from `n_disorder`
/// replicas.
pub fn estimate_k(
    config: &ModelConfig,
    prior: &PriorSpec,
    grid: &GridSpec3,
    n_disorder: usize,
    seed: u64,
    mcmc: &McmcParams,
) -> Result<ConcentrationEstimate> {
    let fields = ReplicaFields::compute(config, prior, grid, n_disorder, seed, mcmc, Evaluator::Auto)?;
    Ok(estimate_k_from_fields(&fields))
}

/// `L_{ψ,M,n} = sup_{h ∈ grid²} |F̄_n(0, h) − ψ(h)|` with `F̄_n(0, ·)` by
/// quadrature. `h_axis` lists the grid values of each coordinate.
pub fn estimate_l<F>(config: &ModelConfig, prior: &PriorSpec, psi: F, h_axis: &[f64]) -> Result<f64>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    if h_axis.is_empty() {
        return Err(Error::InvalidConfig("empty h grid".into()));
    }
    let mut worst = 0.0f64;
    // Both F̄_n(0, ·) and ψ split into a function of h₁ plus one of h₂.
    let mut gap1 = Vec::with_capacity(h_axis.len());
    let mut gap2 = Vec::with_capacity(h_axis.len());
    for &h in h_axis {
        gap1.push(decoupled_mean(config, prior, [h, 0.0])? - psi([h, 0.0])?);
        gap2.push(decoupled_mean(config, prior, [0.0, h])? - psi([0.0, h])?);
    }
    let origin = psi([0.0, 0.0])?;
    for a in &gap1 {
        for b in &gap2 {
            worst = worst.max((a + b + origin).abs());
        }
    }
    Ok(worst)
}

/// Whether an estimate came from exact per-replica values.
pub fn is_exact(method: EstimateMethod) -> bool {
    method != EstimateMethod::MonteCarlo
}
