use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::prior::PriorSpec;
use crate::error::Result;
use crate::rng;

/// One draw of the planted signal and all Gaussian noise for a fixed `n`.
///
/// `w` is stored row-major with `m` rows and `n` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disorder {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub seed: u64,
}

impl Disorder {
    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// `(W y)_i`.
    pub fn w_times(&self, y: &[f64]) -> Vec<f64> {
        self.w
            .chunks_exact(self.n())
            .map(|row| dot(row, y))
            .collect()
    }

    /// `(Wᵀ x)_j`.
    pub fn wt_times(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for (row, &xi) in self.w.chunks_exact(n).zip(x) {
            if xi != 0.0 {
                out.iter_mut().zip(row).for_each(|(o, &w)| *o += xi * w);
            }
        }
        out
    }

    /// The equally distributed twin `(X, Y, −W, −U, −V)`.
    pub fn antithetic(&self) -> Disorder {
        let neg = |v: &[f64]| v.iter().map(|g| -g).collect();
        Disorder {
            w: neg(&self.w),
            u: neg(&self.u),
            v: neg(&self.v),
            ..self.clone()
        }
    }

    /// Raw bit pattern of every stored float, for reproducibility checks.
    pub fn to_bits(&self) -> Vec<u64> {
        [&self.x, &self.y, &self.w, &self.u, &self.v]
            .iter()
            .flat_map(|v| v.iter().map(|f| f.to_bits()))
            .chain(std::iter::once(self.seed))
            .collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws `(X, Y, W, U, V)`; the result depends only on `(config, prior, seed)`.
pub fn sample_disorder(config: &ModelConfig, prior: &PriorSpec, seed: u64) -> Result<Disorder> {
    config.validate()?;
    prior.validate()?;
    let (m, n) = (config.m(), config.n);
    let mut rng = rng::stream(seed);
    let x = prior.x.sample(m, &mut rng)?;
    let y = prior.y.sample(n, &mut rng)?;
    let mut gaussians = |len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.sample(StandardNormal)).collect()
    };
    let w = gaussians(m * n);
    let u = gaussians(m);
    let v = gaussians(n);
    Ok(Disorder { x, y, w, u, v, seed })
}
