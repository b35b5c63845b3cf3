//! Markov chains targeting the Gibbs measure `∝ e^{H_n(t,h;x,y)} P(dx, dy)`.
//!
//! Given `y`, the Hamiltonian is `g·x − q|x|²` plus terms free of `x`, with
//! `g = √(2t/N) W y + ((2t/N)(y·Y) + 2h₁) X + √(2h₁) U` and
//! `q = (t/N)|y|² + h₁`; symmetrically for `y` given `x`. Discrete sides are
//! resampled exactly from this product conditional. Spherical sides use
//! random-walk Metropolis: a Gaussian step in the tangent space followed by
//! projection back onto the sphere, whose proposal density depends only on
//! the angle moved and is therefore symmetric.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::project_to_sphere;
use crate::model::{Disorder, ModelConfig, PriorSpec, SidePrior};
use crate::rng::Rng;

/// Sampler and thermodynamic-integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcParams {
    pub burn_in: usize,
    pub thin: usize,
    pub samples: usize,
    pub target_acceptance: f64,
    /// Gauss–Legendre points per integration segment in `t`.
    pub ti_order: usize,
}

impl Default for McmcParams {
    fn default() -> Self {
        McmcParams {
            burn_in: 1000,
            thin: 10,
            samples: 200,
            target_acceptance: 0.35,
            ti_order: 16,
        }
    }
}

impl McmcParams {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.thin == 0 || self.ti_order == 0 {
            return Err(Error::InvalidConfig(
                "samples, thin and ti_order must be positive".into(),
            ));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::InvalidConfig("target acceptance must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Acceptance band outside of which a tuned chain is reported as failing.
pub const ACCEPTANCE_BAND: (f64, f64) = (0.1, 0.9);
const MAX_STEP: f64 = 20.0;
const MIN_STEP: f64 = 1e-6;
const ADAPT_EVERY: usize = 10;

#[derive(Debug, Clone)]
enum SideKernel {
    HeatBath(Vec<(f64, f64, f64)>),
    Sphere { step: f64, accepted: u64, proposed: u64 },
}

impl SideKernel {
    fn new(side: &SidePrior, dim: usize) -> Self {
        match side {
            SidePrior::IidDiscrete { atoms } => {
                SideKernel::HeatBath(atoms.iter().map(|&(v, w)| (v, w.ln(), v * v)).collect())
            }
            // The sphere of radius 1 in one dimension is {−1, 1}.
            SidePrior::Spherical if dim == 1 => {
                SideKernel::HeatBath(vec![(-1.0, 0.5f64.ln(), 1.0), (1.0, 0.5f64.ln(), 1.0)])
            }
            SidePrior::Spherical => SideKernel::Sphere {
                step: 1.0 / (dim as f64).sqrt(),
                accepted: 0,
                proposed: 0,
            },
        }
    }
}

/// One chain over `(x, y)` for a fixed disorder draw.
#[derive(Debug, Clone)]
pub struct GibbsChain<'a> {
    disorder: &'a Disorder,
    big_n: f64,
    t: f64,
    h: [f64; 2],
    x: Vec<f64>,
    y: Vec<f64>,
    /// `W y`.
    wy: Vec<f64>,
    /// `Wᵀ x`.
    wtx: Vec<f64>,
    kernels: [SideKernel; 2],
    field: Vec<f64>,
    proposal: Vec<f64>,
    rng: Rng,
}

impl<'a> GibbsChain<'a> {
    /// Starts from a prior draw.
    pub fn new(
        config: &ModelConfig,
        prior: &PriorSpec,
        disorder: &'a Disorder,
        t: f64,
        h: [f64; 2],
        mut rng: Rng,
    ) -> Result<Self> {
        let (m, n) = (config.m(), config.n);
        if disorder.m() != m || disorder.n() != n {
            return Err(Error::DimensionMismatch {
                what: "disorder",
                expected: m * n,
                got: disorder.m() * disorder.n(),
            });
        }
        prior.validate()?;
        let x = prior.x.sample(m, &mut rng)?;
        let y = prior.y.sample(n, &mut rng)?;
        let wy = disorder.w_times(&y);
        let wtx = disorder.wt_times(&x);
        let mut chain = GibbsChain {
            disorder,
            big_n: config.big_n(),
            t: 0.0,
            h: [0.0; 2],
            x,
            y,
            wy,
            wtx,
            kernels: [SideKernel::new(&prior.x, m), SideKernel::new(&prior.y, n)],
            field: Vec::with_capacity(m.max(n)),
            proposal: Vec::with_capacity(m.max(n)),
            rng,
        };
        chain.set_point(t, h)?;
        Ok(chain)
    }

    /// Moves the target to `(t, h)` keeping the current state.
    pub fn set_point(&mut self, t: f64, h: [f64; 2]) -> Result<()> {
        if !(t >= 0.0 && h[0] >= 0.0 && h[1] >= 0.0) {
            return Err(Error::InvalidConfig("t and h must be nonnegative".into()));
        }
        self.t = t;
        self.h = h;
        Ok(())
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// `x · W y` at the current state.
    pub fn x_dot_wy(&self) -> f64 {
        dot(&self.x, &self.wy)
    }

    /// `(x·Wy, (2/N)(x·X)(y·Y) − |x|²|y|²/N)`, so that
    /// `∂ₜH_n = x·Wy/√(2Nt) + second`.
    pub fn dh_dt_parts(&self) -> (f64, f64) {
        let d = self.disorder;
        let n = self.big_n;
        let xx = dot(&self.x, &self.x);
        let yy = dot(&self.y, &self.y);
        (
            self.x_dot_wy(),
            2.0 / n * dot(&self.x, &d.x) * dot(&self.y, &d.y) - xx * yy / n,
        )
    }

    /// One update of `x` given `y` followed by one of `y` given `x`.
    pub fn sweep(&mut self) {
        self.update_side(0);
        self.wtx = self.disorder.wt_times(&self.x);
        self.update_side(1);
        self.wy = self.disorder.w_times(&self.y);
    }

    fn update_side(&mut self, side: usize) {
        let a = (2.0 * self.t / self.big_n).sqrt();
        let b = 2.0 * self.t / self.big_n;
        let c = self.t / self.big_n;
        let d = self.disorder;
        let (h, coupled, other, other_planted, planted, noise) = if side == 0 {
            (self.h[0], &self.wy, &self.y, &d.y, &d.x, &d.u)
        } else {
            (self.h[1], &self.wtx, &self.x, &d.x, &d.y, &d.v)
        };
        let shift = b * dot(other, other_planted) + 2.0 * h;
        let s = (2.0 * h).sqrt();
        let q = c * dot(other, other) + h;
        self.field.clear();
        self.field.extend(
            coupled
                .iter()
                .zip(planted)
                .zip(noise)
                .map(|((&cv, &p), &u)| a * cv + shift * p + s * u),
        );
        let state = if side == 0 { &mut self.x } else { &mut self.y };
        match &mut self.kernels[side] {
            SideKernel::HeatBath(atoms) => {
                for (xi, &g) in state.iter_mut().zip(&self.field) {
                    *xi = draw_atom(atoms, g, q, &mut self.rng);
                }
            }
            SideKernel::Sphere {
                step,
                accepted,
                proposed,
            } => {
                // |x|² is constant on the sphere, so only g·x matters.
                let dim = state.len();
                for _ in 0..dim {
                    self.proposal.clear();
                    let mut radial = 0.0;
                    for _ in 0..dim {
                        let z: f64 = self.rng.sample(StandardNormal);
                        self.proposal.push(z);
                    }
                    for (z, &xi) in self.proposal.iter().zip(state.iter()) {
                        radial += z * xi;
                    }
                    radial /= dim as f64;
                    let scale = *step;
                    for (z, &xi) in self.proposal.iter_mut().zip(state.iter()) {
                        *z = xi + scale * (*z - radial * xi);
                    }
                    project_to_sphere(&mut self.proposal);
                    let delta: f64 = self
                        .field
                        .iter()
                        .zip(self.proposal.iter().zip(state.iter()))
                        .map(|(&g, (&p, &xi))| g * (p - xi))
                        .sum();
                    *proposed += 1;
                    let u: f64 = self.rng.gen();
                    if delta >= 0.0 || u < delta.exp() {
                        state.copy_from_slice(&self.proposal);
                        *accepted += 1;
                    }
                }
            }
        }
    }

    /// Burn-in with step-size adaptation towards the target acceptance rate.
    ///
    /// The log step moves by `gain · (rate − target)` every few sweeps, with a
    /// gain decaying like `1/√k` so that the step settles.
    pub fn tune(&mut self, sweeps: usize, target: f64) {
        for k in 0..sweeps {
            self.sweep();
            if (k + 1) % ADAPT_EVERY == 0 {
                let round = ((k + 1) / ADAPT_EVERY) as f64;
                let gain = 4.0 / round.sqrt();
                for kernel in &mut self.kernels {
                    if let SideKernel::Sphere {
                        step,
                        accepted,
                        proposed,
                    } = kernel
                    {
                        let rate = *accepted as f64 / (*proposed).max(1) as f64;
                        *step = (*step * (gain * (rate - target)).exp()).clamp(MIN_STEP, MAX_STEP);
                        *accepted = 0;
                        *proposed = 0;
                    }
                }
            }
        }
        self.reset_counters();
    }

    pub fn reset_counters(&mut self) {
        for kernel in &mut self.kernels {
            if let SideKernel::Sphere {
                accepted, proposed, ..
            } = kernel
            {
                *accepted = 0;
                *proposed = 0;
            }
        }
    }

    /// Acceptance rate of each Metropolis side since the last reset.
    pub fn acceptance(&self) -> [Option<f64>; 2] {
        let rate = |k: &SideKernel| match k {
            SideKernel::Sphere {
                accepted, proposed, ..
            } if *proposed > 0 => Some(*accepted as f64 / *proposed as f64),
            _ => None,
        };
        [rate(&self.kernels[0]), rate(&self.kernels[1])]
    }

    /// Fails when a Metropolis side left the acceptance band after tuning.
    ///
    /// A rate above the band is accepted when the step is at its cap: the
    /// conditional is then nearly uniform and every proposal is accepted.
    pub fn check_diagnostics(&self) -> Result<()> {
        for (side, kernel) in self.kernels.iter().enumerate() {
            if let SideKernel::Sphere {
                step,
                accepted,
                proposed,
            } = kernel
            {
                if *proposed == 0 {
                    continue;
                }
                let rate = *accepted as f64 / *proposed as f64;
                let saturated = rate > ACCEPTANCE_BAND.1 && *step >= MAX_STEP;
                if (rate < ACCEPTANCE_BAND.0 || rate > ACCEPTANCE_BAND.1) && !saturated {
                    return Err(Error::McmcDiagnostics {
                        what: format!("{} side at t={}, h={:?}", ["x", "y"][side], self.t, self.h),
                        rate,
                    });
                }
            }
        }
        Ok(())
    }

    /// Runs `samples` thinned sweeps, calling `observe` after each.
    pub fn run(&mut self, params: &McmcParams, mut observe: impl FnMut(&Self)) -> Result<()> {
        for _ in 0..params.samples {
            for _ in 0..params.thin {
                self.sweep();
            }
            observe(self);
        }
        self.check_diagnostics()
    }
}

fn draw_atom(atoms: &[(f64, f64, f64)], g: f64, q: f64, rng: &mut Rng) -> f64 {
    let top = atoms
        .iter()
        .map(|&(v, lw, v2)| lw + g * v - q * v2)
        .fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = atoms
        .iter()
        .map(|&(v, lw, v2)| (lw + g * v - q * v2 - top).exp())
        .sum();
    let mut u = rng.gen::<f64>() * total;
    for &(v, lw, v2) in atoms {
        u -= (lw + g * v - q * v2 - top).exp();
        if u <= 0.0 {
            return v;
        }
    }
    atoms[atoms.len() - 1].0
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}
