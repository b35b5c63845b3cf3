//! Exact free energies and Gibbs moments by enumeration.
//!
//! For a product prior the Hamiltonian is, for a fixed configuration of one
//! side, separable across the coordinates of the other side. We therefore
//! enumerate the side with fewer configurations and sum the other side
//! coordinate by coordinate; the cost is `k^d · d'` instead of `k^d · k'^{d'}`.

use crate::error::{Error, Result};
use crate::model::{Disorder, ModelConfig, PriorSpec, SidePrior};
use crate::stats::LogSumExp;

/// Largest number of joint configurations accepted by the enumeration guard.
pub const ENUMERATION_LIMIT: f64 = 16_777_216.0;

/// `k^m · k'^n`, or `None` when a side is not discrete.
pub fn configuration_count(config: &ModelConfig, prior: &PriorSpec) -> Option<f64> {
    let kx = prior.x.atoms()?.len() as f64;
    let ky = prior.y.atoms()?.len() as f64;
    Some(kx.powi(config.m() as i32) * ky.powi(config.n as i32))
}

pub fn is_enumerable(config: &ModelConfig, prior: &PriorSpec) -> bool {
    configuration_count(config, prior).is_some_and(|c| c <= ENUMERATION_LIMIT)
}

/// Gibbs averages needed by the overlap and Nishimori identities.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsMoments {
    pub log_z: f64,
    /// `⟨x⟩`, length `m`.
    pub mean_x: Vec<f64>,
    /// `⟨y⟩`, length `n`.
    pub mean_y: Vec<f64>,
    /// `⟨x_i y_j⟩`, row-major `m × n`.
    pub mean_xy: Vec<f64>,
    pub mean_sq_x: f64,
    pub mean_sq_y: f64,
}

impl GibbsMoments {
    /// `⟨x·x'⟩ = |⟨x⟩|²`.
    pub fn overlap_x(&self) -> f64 {
        self.mean_x.iter().map(|v| v * v).sum()
    }

    /// `⟨y·y'⟩ = |⟨y⟩|²`.
    pub fn overlap_y(&self) -> f64 {
        self.mean_y.iter().map(|v| v * v).sum()
    }

    /// `⟨(x·x')(y·y')⟩ = Σᵢⱼ ⟨xᵢyⱼ⟩²`.
    pub fn overlap_xy(&self) -> f64 {
        self.mean_xy.iter().map(|v| v * v).sum()
    }

    /// `⟨x·a⟩`.
    pub fn x_dot(&self, a: &[f64]) -> f64 {
        self.mean_x.iter().zip(a).map(|(p, q)| p * q).sum()
    }

    pub fn y_dot(&self, b: &[f64]) -> f64 {
        self.mean_y.iter().zip(b).map(|(p, q)| p * q).sum()
    }

    /// `⟨(x·a)(y·b)⟩ = Σᵢⱼ aᵢ bⱼ ⟨xᵢyⱼ⟩`.
    pub fn xy_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = b.len();
        self.mean_xy
            .chunks_exact(n)
            .zip(a)
            .map(|(row, &ai)| ai * row.iter().zip(b).map(|(p, q)| p * q).sum::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone)]
enum InnerAtoms {
    /// `±1` with equal weights.
    Symmetric,
    General(Vec<(f64, f64, f64)>),
}

/// Precomputed enumeration state for one disorder draw.
#[derive(Debug, Clone)]
pub struct Enumerator {
    big_n: f64,
    /// The enumerated ("outer") side is `Y` rather than `X`.
    swapped: bool,
    outer_dim: usize,
    inner_dim: usize,
    inner: InnerAtoms,
    /// Outer configurations, `outer_dim` values each.
    configs: Vec<f64>,
    log_prior: Vec<f64>,
    /// Coupling matrix applied to each configuration, `inner_dim` values each.
    coupled: Vec<f64>,
    planted_dot: Vec<f64>,
    noise_dot: Vec<f64>,
    sq_norm: Vec<f64>,
    inner_planted: Vec<f64>,
    inner_noise: Vec<f64>,
}

impl Enumerator {
    pub fn new(config: &ModelConfig, prior: &PriorSpec, disorder: &Disorder) -> Result<Self> {
        let (m, n) = (config.m(), config.n);
        if disorder.m() != m || disorder.n() != n {
            return Err(Error::DimensionMismatch {
                what: "disorder",
                expected: m * n,
                got: disorder.m() * disorder.n(),
            });
        }
        let count = configuration_count(config, prior).ok_or_else(|| {
            Error::InvalidConfig("exact enumeration needs discrete priors on both sides".into())
        })?;
        if count > ENUMERATION_LIMIT {
            return Err(Error::EnumerationTooLarge { configs: count });
        }
        let (ax, ay) = (atoms_of(&prior.x), atoms_of(&prior.y));
        let outer_x = (ax.len() as f64).powi(m as i32) <= (ay.len() as f64).powi(n as i32);
        let (outer_atoms, inner_atoms, outer_dim, inner_dim) = if outer_x {
            (ax, ay, m, n)
        } else {
            (ay, ax, n, m)
        };
        let (outer_planted, outer_noise, inner_planted, inner_noise) = if outer_x {
            (&disorder.x, &disorder.u, &disorder.y, &disorder.v)
        } else {
            (&disorder.y, &disorder.v, &disorder.x, &disorder.u)
        };

        let k = outer_atoms.len();
        let total = k.pow(outer_dim as u32);
        let mut configs = Vec::with_capacity(total * outer_dim);
        let mut log_prior = Vec::with_capacity(total);
        let mut coupled = Vec::with_capacity(total * inner_dim);
        let mut planted_dot = Vec::with_capacity(total);
        let mut noise_dot = Vec::with_capacity(total);
        let mut sq_norm = Vec::with_capacity(total);
        let mut digits = vec![0usize; outer_dim];
        let mut cfg = vec![0.0; outer_dim];
        for _ in 0..total {
            let mut lp = 0.0;
            for (slot, &d) in cfg.iter_mut().zip(&digits) {
                *slot = outer_atoms[d].0;
                lp += outer_atoms[d].1.ln();
            }
            let c = if outer_x {
                disorder.wt_times(&cfg)
            } else {
                disorder.w_times(&cfg)
            };
            configs.extend_from_slice(&cfg);
            log_prior.push(lp);
            coupled.extend(c);
            planted_dot.push(dot(&cfg, outer_planted));
            noise_dot.push(dot(&cfg, outer_noise));
            sq_norm.push(dot(&cfg, &cfg));
            for d in digits.iter_mut() {
                *d += 1;
                if *d < k {
                    break;
                }
                *d = 0;
            }
        }

        let inner = if is_symmetric_pm1(&inner_atoms) {
            InnerAtoms::Symmetric
        } else {
            InnerAtoms::General(inner_atoms.iter().map(|&(v, w)| (v, w.ln(), v * v)).collect())
        };

        Ok(Enumerator {
            big_n: config.big_n(),
            swapped: !outer_x,
            outer_dim,
            inner_dim,
            inner,
            configs,
            log_prior,
            coupled,
            planted_dot,
            noise_dot,
            sq_norm,
            inner_planted: inner_planted.clone(),
            inner_noise: inner_noise.clone(),
        })
    }

    pub fn n_configs(&self) -> usize {
        self.log_prior.len()
    }

    fn oriented(&self, h: [f64; 2]) -> (f64, f64) {
        if self.swapped {
            (h[1], h[0])
        } else {
            (h[0], h[1])
        }
    }

    /// Log-weight of outer configuration `c` after summing out the inner side.
    /// `g` receives the inner-side linear fields; `q` is the inner quadratic coefficient.
    #[inline]
    fn config_weight(&self, c: usize, coeffs: &Coefficients, g: &mut [f64]) -> (f64, f64) {
        let d = self.inner_dim;
        let pd = self.planted_dot[c];
        let shift = coeffs.b * pd + coeffs.two_h_in;
        let coupled = &self.coupled[c * d..(c + 1) * d];
        for j in 0..d {
            g[j] = coeffs.a * coupled[j]
                + shift * self.inner_planted[j]
                + coeffs.sqrt_2h_in * self.inner_noise[j];
        }
        let q = coeffs.c * self.sq_norm[c] + coeffs.h_in;
        let inner_log = match &self.inner {
            InnerAtoms::Symmetric => {
                g.iter().map(|&gj| log_cosh(gj)).sum::<f64>() - q * d as f64
            }
            InnerAtoms::General(atoms) => g
                .iter()
                .map(|&gj| {
                    let mut acc = LogSumExp::default();
                    for &(v, lw, v2) in atoms {
                        acc.push(lw + gj * v - q * v2);
                    }
                    acc.value()
                })
                .sum(),
        };
        let base = self.log_prior[c] + coeffs.sqrt_2h_out * self.noise_dot[c]
            + coeffs.two_h_out * pd
            - coeffs.h_out * self.sq_norm[c];
        (base + inner_log, q)
    }

    fn coefficients(&self, t: f64, h: [f64; 2]) -> Coefficients {
        let (h_out, h_in) = self.oriented(h);
        Coefficients {
            a: (2.0 * t / self.big_n).sqrt(),
            b: 2.0 * t / self.big_n,
            c: t / self.big_n,
            h_out,
            h_in,
            two_h_out: 2.0 * h_out,
            two_h_in: 2.0 * h_in,
            sqrt_2h_out: (2.0 * h_out).sqrt(),
            sqrt_2h_in: (2.0 * h_in).sqrt(),
        }
    }

    /// `log ∫ e^{H_n} dP`.
    pub fn log_partition(&self, t: f64, h: [f64; 2]) -> f64 {
        let coeffs = self.coefficients(t, h);
        let mut g = vec![0.0; self.inner_dim];
        let mut acc = LogSumExp::default();
        for c in 0..self.n_configs() {
            acc.push(self.config_weight(c, &coeffs, &mut g).0);
        }
        acc.value()
    }

    /// `F_n(t, h)` for this disorder.
    pub fn free_energy(&self, t: f64, h: [f64; 2]) -> f64 {
        self.log_partition(t, h) / self.big_n
    }

    /// Log-partition together with first and mixed Gibbs moments.
    pub fn moments(&self, t: f64, h: [f64; 2]) -> GibbsMoments {
        let coeffs = self.coefficients(t, h);
        let total = self.n_configs();
        let (od, id) = (self.outer_dim, self.inner_dim);
        let mut g = vec![0.0; id];
        let mut weights = Vec::with_capacity(total);
        let mut acc = LogSumExp::default();
        for c in 0..total {
            let w = self.config_weight(c, &coeffs, &mut g).0;
            acc.push(w);
            weights.push(w);
        }
        let log_z = acc.value();

        let mut mean_out = vec![0.0; od];
        let mut mean_in = vec![0.0; id];
        let mut mean_oi = vec![0.0; od * id];
        let mut sq_out = 0.0;
        let mut sq_in = 0.0;
        let mut cond_mean = vec![0.0; id];
        for c in 0..total {
            let p = (weights[c] - log_z).exp();
            if p == 0.0 {
                continue;
            }
            let (_, q) = self.config_weight(c, &coeffs, &mut g);
            let mut cond_sq = 0.0;
            for j in 0..id {
                let (m1, m2) = self.inner_conditional(g[j], q);
                cond_mean[j] = m1;
                cond_sq += m2;
            }
            let cfg = &self.configs[c * od..(c + 1) * od];
            for (i, &xi) in cfg.iter().enumerate() {
                mean_out[i] += p * xi;
                if xi != 0.0 {
                    let row = &mut mean_oi[i * id..(i + 1) * id];
                    row.iter_mut()
                        .zip(&cond_mean)
                        .for_each(|(r, &cm)| *r += p * xi * cm);
                }
            }
            mean_in
                .iter_mut()
                .zip(&cond_mean)
                .for_each(|(r, &cm)| *r += p * cm);
            sq_out += p * self.sq_norm[c];
            sq_in += p * cond_sq;
        }

        if self.swapped {
            let mut mean_xy = vec![0.0; od * id];
            for i in 0..od {
                for j in 0..id {
                    mean_xy[j * od + i] = mean_oi[i * id + j];
                }
            }
            GibbsMoments {
                log_z,
                mean_x: mean_in,
                mean_y: mean_out,
                mean_xy,
                mean_sq_x: sq_in,
                mean_sq_y: sq_out,
            }
        } else {
            GibbsMoments {
                log_z,
                mean_x: mean_out,
                mean_y: mean_in,
                mean_xy: mean_oi,
                mean_sq_x: sq_out,
                mean_sq_y: sq_in,
            }
        }
    }

    /// First and second moment of one inner coordinate given its linear field.
    fn inner_conditional(&self, g: f64, q: f64) -> (f64, f64) {
        match &self.inner {
            InnerAtoms::Symmetric => (g.tanh(), 1.0),
            InnerAtoms::General(atoms) => {
                let top = atoms
                    .iter()
                    .map(|&(v, lw, v2)| lw + g * v - q * v2)
                    .fold(f64::NEG_INFINITY, f64::max);
                let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
                for &(v, lw, v2) in atoms {
                    let e = (lw + g * v - q * v2 - top).exp();
                    z += e;
                    m1 += e * v;
                    m2 += e * v2;
                }
                (m1 / z, m2 / z)
            }
        }
    }
}

struct Coefficients {
    a: f64,
    b: f64,
    c: f64,
    h_out: f64,
    h_in: f64,
    two_h_out: f64,
    two_h_in: f64,
    sqrt_2h_out: f64,
    sqrt_2h_in: f64,
}

fn atoms_of(side: &SidePrior) -> Vec<(f64, f64)> {
    side.atoms().map(<[_]>::to_vec).unwrap_or_default()
}

fn is_symmetric_pm1(atoms: &[(f64, f64)]) -> bool {
    atoms.len() == 2
        && atoms.iter().all(|&(_, w)| (w - 0.5).abs() < 1e-15)
        && ((atoms[0].0 == 1.0 && atoms[1].0 == -1.0) || (atoms[0].0 == -1.0 && atoms[1].0 == 1.0))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log cosh(g) − log 2 + log 2`, i.e. `log((e^g + e^{−g})/2)`.
#[inline]
pub(crate) fn log_cosh(g: f64) -> f64 {
    let a = g.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Exact `F_n(t, h)` for one disorder draw.
pub fn free_energy_exact(
    config: &ModelConfig,
    prior: &PriorSpec,
    disorder: &Disorder,
    t: f64,
    h: [f64; 2],
) -> Result<f64> {
    if t < 0.0 || h[0] < 0.0 || h[1] < 0.0 {
        return Err(Error::InvalidConfig("t and h must be nonnegative".into()));
    }
    Ok(Enumerator::new(config, prior, disorder)?.free_energy(t, h))
}
