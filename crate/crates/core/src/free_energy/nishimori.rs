//! Nishimori identity: replacing one replica by the planted signal leaves
//! disorder averages unchanged, e.g. `E⟨x·X⟩ = E⟨x·x'⟩`.
//!
//! With exact enumeration each side is computed without sampling noise. The
//! planted side is averaged over the posterior of the signal given the
//! observation `(Z, √(2h₁)X + U, √(2h₂)Y + V)`, evaluated by brute force from
//! the Gaussian likelihood with `Z` materialized. The replica side uses the
//! Gibbs measure of the enriched Hamiltonian. The identity then holds for
//! every draw up to roundoff, and checks that the Hamiltonian is the
//! log-posterior. The plain planted average (no posterior averaging) is
//! reported alongside as a statistical check.

use serde::{Deserialize, Serialize};

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::model::{sample_disorder, Disorder, ModelConfig, PriorSpec};
use crate::parallel::try_map_indexed;
use crate::rng::replica_seed;
use crate::stats::{mean_se, LogSumExp};

use super::exact::{Enumerator, GibbsMoments};
use super::overlaps::{overlaps_for_disorder, ReplicaOverlaps, Sampler};

/// Largest planted enumeration accepted by the exact posterior check.
pub const POSTERIOR_LIMIT: usize = 1 << 16;
/// Relative tolerance of the exact identity.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Overlap functional compared between the planted and replica forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NishimoriStatistic {
    /// `x·X` vs `x·x'`.
    X,
    /// `y·Y` vs `y·y'`.
    Y,
    /// `(x·X)(y·Y)` vs `(x·x')(y·y')`.
    Joint,
}

impl NishimoriStatistic {
    pub const ALL: [NishimoriStatistic; 3] =
        [NishimoriStatistic::X, NishimoriStatistic::Y, NishimoriStatistic::Joint];

    pub fn name(self) -> &'static str {
        match self {
            NishimoriStatistic::X => "x",
            NishimoriStatistic::Y => "y",
            NishimoriStatistic::Joint => "joint",
        }
    }

    fn planted(self, r: &ReplicaOverlaps) -> f64 {
        match self {
            NishimoriStatistic::X => r.x_planted,
            NishimoriStatistic::Y => r.y_planted,
            NishimoriStatistic::Joint => r.xy_planted,
        }
    }

    fn replica(self, r: &ReplicaOverlaps) -> f64 {
        match self {
            NishimoriStatistic::X => r.xx,
            NishimoriStatistic::Y => r.yy,
            NishimoriStatistic::Joint => r.xxyy,
        }
    }

    fn moment(self, mo: &GibbsMoments, a: &[f64], b: &[f64]) -> f64 {
        match self {
            NishimoriStatistic::X => mo.x_dot(a),
            NishimoriStatistic::Y => mo.y_dot(b),
            NishimoriStatistic::Joint => mo.xy_dot(a, b),
        }
    }
}

impl std::str::FromStr for NishimoriStatistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(NishimoriStatistic::X),
            "y" => Ok(NishimoriStatistic::Y),
            "joint" | "xy" => Ok(NishimoriStatistic::Joint),
            other => Err(Error::InvalidConfig(format!("unknown statistic {other:?}"))),
        }
    }
}

fn configurations(atoms: &[(f64, f64)], dim: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::with_capacity(dim), 0.0)];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|(v, lp)| {
                atoms.iter().map(move |&(a, w)| {
                    let mut next = v.clone();
                    next.push(a);
                    (next, lp + w.ln())
                })
            })
            .collect();
    }
    out
}

/// `Σ_{X',Y'} p(X',Y' | observation) · stat(X', Y')` for every statistic,
/// where `stat` is the Gibbs average of the statistic against the candidate.
fn posterior_planted(
    config: &ModelConfig,
    prior: &PriorSpec,
    disorder: &Disorder,
    t: f64,
    h: [f64; 2],
    mo: &GibbsMoments,
) -> Result<[f64; 3]> {
    let (m, n) = (config.m(), config.n);
    let ax = prior.x.atoms().ok_or_else(|| Error::InvalidConfig("discrete prior required".into()))?;
    let ay = prior.y.atoms().ok_or_else(|| Error::InvalidConfig("discrete prior required".into()))?;
    let count = (ax.len() as f64).powi(m as i32) * (ay.len() as f64).powi(n as i32);
    if count > POSTERIOR_LIMIT as f64 {
        return Err(Error::EnumerationTooLarge { configs: count });
    }
    let a = (2.0 * t / config.big_n()).sqrt();
    let (s1, s2) = ((2.0 * h[0]).sqrt(), (2.0 * h[1]).sqrt());
    let z: Vec<f64> = (0..m * n)
        .map(|k| a * disorder.x[k / n] * disorder.y[k % n] + disorder.w[k])
        .collect();
    let obs_x: Vec<f64> = (0..m).map(|i| s1 * disorder.x[i] + disorder.u[i]).collect();
    let obs_y: Vec<f64> = (0..n).map(|j| s2 * disorder.y[j] + disorder.v[j]).collect();
    let xs = configurations(ax, m);
    let ys = configurations(ay, n);
    let mut log_post = Vec::with_capacity(xs.len() * ys.len());
    let mut stats = Vec::with_capacity(xs.len() * ys.len());
    let mut norm = LogSumExp::default();
    for (xc, lx) in &xs {
        let ex: f64 = (0..m).map(|i| (obs_x[i] - s1 * xc[i]).powi(2)).sum();
        for (yc, ly) in &ys {
            let ey: f64 = (0..n).map(|j| (obs_y[j] - s2 * yc[j]).powi(2)).sum();
            let mut ez = 0.0;
            for i in 0..m {
                for j in 0..n {
                    ez += (z[i * n + j] - a * xc[i] * yc[j]).powi(2);
                }
            }
            let lp = lx + ly - 0.5 * (ex + ey + ez);
            norm.push(lp);
            log_post.push(lp);
            stats.push(NishimoriStatistic::ALL.map(|s| s.moment(mo, xc, yc)));
        }
    }
    let log_z = norm.value();
    let mut out = [0.0; 3];
    for (lp, st) in log_post.iter().zip(&stats) {
        let p = (lp - log_z).exp();
        for k in 0..3 {
            out[k] += p * st[k];
        }
    }
    Ok(out)
}

/// Compares the planted and replica forms of `statistic` at `(t, h)`.
///
/// With [`Sampler::Exact`] the posterior-averaged planted side must agree
/// with the replica side to [`EXACT_TOLERANCE`] (relative); the plain planted
/// average must agree within `tolerance_sigma` standard errors of the
/// replica-paired difference. With [`Sampler::Mcmc`] only the latter applies.
#[allow(clippy::too_many_arguments)]
pub fn nishimori_check(
    config: &ModelConfig,
    prior: &PriorSpec,
    t: f64,
    h: [f64; 2],
    statistic: NishimoriStatistic,
    tolerance_sigma: f64,
    n_disorder: usize,
    seed: u64,
    sampler: &Sampler,
) -> Result<CheckReport> {
    if n_disorder < 2 {
        return Err(Error::InvalidConfig("n_disorder must be at least 2".into()));
    }
    let exact = matches!(sampler, Sampler::Exact);
    let rows = try_map_indexed(n_disorder, |r| -> Result<(ReplicaOverlaps, f64)> {
        let s = replica_seed(seed, r);
        let d = sample_disorder(config, prior, s)?;
        if exact {
            let mo = Enumerator::new(config, prior, &d)?.moments(t, h);
            let rb = posterior_planted(config, prior, &d, t, h, &mo)?;
            let ov = overlaps_for_disorder(config, prior, &d, t, h, sampler, s)?;
            let k = NishimoriStatistic::ALL.iter().position(|&x| x == statistic).unwrap();
            Ok((ov, rb[k]))
        } else {
            Ok((overlaps_for_disorder(config, prior, &d, t, h, sampler, s)?, f64::NAN))
        }
    })?;

    let mut report = CheckReport::new(format!(
        "nishimori[{}] t={t} h=({}, {})",
        statistic.name(),
        h[0],
        h[1]
    ));
    let replica: Vec<f64> = rows.iter().map(|(o, _)| statistic.replica(o)).collect();
    let planted: Vec<f64> = rows.iter().map(|(o, _)| statistic.planted(o)).collect();
    let (rhs, rhs_se) = mean_se(&replica);
    let (lhs, lhs_se) = mean_se(&planted);
    report.note(format!("planted side {lhs:.12e} ± {lhs_se:.3e}"));
    report.note(format!("replica side {rhs:.12e} ± {rhs_se:.3e}"));

    if exact {
        let scale = rhs.abs().max(1.0);
        let worst = rows
            .iter()
            .map(|(o, rb)| (rb - statistic.replica(o)).abs())
            .fold(0.0, f64::max);
        let rb_mean = mean_se(&rows.iter().map(|(_, rb)| *rb).collect::<Vec<_>>()).0;
        report.at_most("posterior-averaged |Δ| (mean)", (rb_mean - rhs).abs(), EXACT_TOLERANCE * scale);
        report.at_most("posterior-averaged |Δ| (worst draw)", worst, EXACT_TOLERANCE * scale);
    }

    let diffs: Vec<f64> = planted.iter().zip(&replica).map(|(p, q)| p - q).collect();
    let (delta, sigma) = mean_se(&diffs);
    let bound = if sigma > 0.0 {
        tolerance_sigma * sigma
    } else {
        EXACT_TOLERANCE * rhs.abs().max(1.0)
    };
    report.at_most(format!("planted |Δ| vs {tolerance_sigma}σ"), delta.abs(), bound);
    Ok(report)
}
