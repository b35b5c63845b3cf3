//! End-to-end convergence runs: for each `n`, the disorder-averaged free
//! energy on the cube, the Hopf solution from the limiting `ψ`, the `L¹`
//! gap per time slice, and the concentration and initial-condition terms of
//! the error bound `C M² (L + 1/n + K^{2/3} + K)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::check::CheckReport;
use crate::error::Result;
use crate::free_energy::{estimate_k_from_fields, estimate_l, EstimateMethod, ReplicaFields};
use crate::grid::{GridSpec3, ScalarField3};
use crate::hj::HopfSolution;
use crate::model::ModelConfig;
use crate::rng::replica_seed;

use super::config::ExperimentConfig;
use super::fit::{fit_rate, RateFit};
use super::gap::{gap_functional, GapProfile};

const DOMAIN_SALT: u64 = 0x5eed_d0ae;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Everything computed for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRecord {
    pub n: usize,
    pub m: usize,
    pub beta_n: f64,
    pub seeds: [u64; 2],
    pub method: Option<EstimateMethod>,
    /// Concentration over the cube `[0, M]³`.
    pub k: Option<Estimate>,
    /// Concentration over the enlarged cube `[0, c M]³`.
    pub k_domain: Option<Estimate>,
    /// Initial-condition gap over `[0, M]²`.
    pub l: Option<f64>,
    pub l_domain: Option<f64>,
    /// The enlargement factor `c = 2√2 (1 + R)/R`, `R = 1 + max |∇ₕF̄|`.
    pub domain_scale: Option<f64>,
    pub gap: Option<GapProfile>,
    /// `L + 1/n + K^{2/3} + K` on the enlarged cube.
    pub bound_term: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub k: Option<RateFit>,
    pub l: Option<RateFit>,
    pub gap: Option<RateFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub degenerate: bool,
    pub records: Vec<SizeRecord>,
    /// `Ĉ = gap / (M² · bound_term)` at the smallest completed `n`.
    pub calibrated_constant: Option<f64>,
    pub fits: Fits,
    pub checks: CheckReport,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn record(&self, n: usize) -> Option<&SizeRecord> {
        self.records.iter().find(|r| r.n == n)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Largest Euclidean forward-difference gradient in `h` over all slices.
fn max_h_slope(field: &ScalarField3) -> f64 {
    let g = field.grid;
    let dh = g.dh();
    let mut worst = 0.0f64;
    for it in 0..g.n_t {
        for i in 0..g.n_h - 1 {
            for j in 0..g.n_h - 1 {
                let c = field.at(it, i, j);
                let d1 = (field.at(it, i + 1, j) - c) / dh;
                let d2 = (field.at(it, i, j + 1) - c) / dh;
                worst = worst.max(d1.hypot(d2));
            }
        }
    }
    worst
}

struct SizeOutput {
    record: SizeRecord,
    mean: Option<ScalarField3>,
}

fn run_size(
    config: &ExperimentConfig,
    grid: &GridSpec3,
    hopf: &ScalarField3,
    n: usize,
) -> SizeOutput {
    let model = ModelConfig {
        n,
        alpha: config.alpha,
        size_map: Default::default(),
    };
    let seeds = [replica_seed(config.seed, n), replica_seed(config.seed ^ DOMAIN_SALT, n)];
    let mut record = SizeRecord {
        n,
        m: model.m(),
        beta_n: model.beta_n(),
        seeds,
        method: None,
        k: None,
        k_domain: None,
        l: None,
        l_domain: None,
        domain_scale: None,
        gap: None,
        bound_term: None,
        error: None,
    };
    let mut mean = None;
    let outcome = (|| -> Result<()> {
        let prior = config.case.prior();
        let ic = config.case.initial_condition(config.alpha);
        let psi = |h: [f64; 2]| ic.value(h);
        let compute = if config.antithetic {
            ReplicaFields::compute_antithetic
        } else {
            ReplicaFields::compute
        };
        let fields = compute(&model, &prior, grid, config.n_disorder, seeds[0], &config.mcmc, config.evaluator)?;
        record.method = Some(fields.method);
        let fbar = fields.mean_field()?;
        let k = estimate_k_from_fields(&fields).estimate;
        record.k = Some(Estimate {
            mean: k.mean,
            std_error: k.std_error,
        });
        record.l = Some(estimate_l(&model, &prior, psi, &grid.h_axis())?);
        record.gap = Some(gap_functional(&fbar, hopf)?);

        let r = 1.0 + max_h_slope(&fbar);
        let scale = 2.0 * std::f64::consts::SQRT_2 * (1.0 + r) / r;
        record.domain_scale = Some(scale);
        let domain = GridSpec3::cube(scale * config.m_bound, config.domain_points)?;
        let wide = compute(
            &model,
            &prior,
            &domain,
            config.n_disorder,
            seeds[1],
            &config.mcmc,
            config.evaluator,
        )?;
        let kd = estimate_k_from_fields(&wide).estimate;
        record.k_domain = Some(Estimate {
            mean: kd.mean,
            std_error: kd.std_error,
        });
        let ld = estimate_l(&model, &prior, psi, &domain.h_axis())?;
        record.l_domain = Some(ld);
        record.bound_term = Some(ld + 1.0 / n as f64 + kd.mean.powf(2.0 / 3.0) + kd.mean);
        mean = Some(fbar);
        Ok(())
    })();
    if let Err(e) = outcome {
        record.error = Some(e.to_string());
    }
    SizeOutput { record, mean }
}

fn fit_of(records: &[SizeRecord], value: impl Fn(&SizeRecord) -> Option<f64>, notes: &mut Vec<String>, name: &str) -> Option<RateFit> {
    let pairs: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| value(r).map(|v| (r.n as f64, v)))
        .collect();
    match fit_rate(&pairs) {
        Ok(fit) => Some(fit),
        Err(e) => {
            notes.push(format!("no {name} fit: {e}"));
            None
        }
    }
}

/// Runs the experiment. Failures at one `n` are recorded and the run
/// continues; files are written when `output_dir` is set.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        config_hash: config.hash(),
        degenerate: false,
        records: Vec::new(),
        calibrated_constant: None,
        fits: Fits {
            k: None,
            l: None,
            gap: None,
        },
        checks: CheckReport::new("convergence"),
        notes: Vec::new(),
    };
    if config.m_bound == 0.0 {
        report.degenerate = true;
        report.notes.push("degenerate domain: M = 0, no gap to compute".into());
        return Ok(report);
    }
    let grid = GridSpec3::cube(config.m_bound, config.points)?;
    let ic = config.case.initial_condition(config.alpha);
    let hopf = HopfSolution::from_initial(&ic, grid.h_max, grid.t_max, config.primal_points, config.dual_points)?
        .field(&grid)?;

    let mut means = Vec::new();
    for &n in &config.n_list {
        let out = run_size(config, &grid, &hopf, n);
        if let Some(e) = &out.record.error {
            report.notes.push(format!("n = {n} failed: {e}"));
        }
        if let Some(m) = out.mean {
            means.push((n, m));
        }
        report.records.push(out.record);
    }

    let done: Vec<&SizeRecord> = report.records.iter().filter(|r| r.error.is_none()).collect();
    let m2 = config.m_bound * config.m_bound;
    for w in done.windows(2) {
        let (a, b) = (w[0].gap.as_ref().unwrap().sup, w[1].gap.as_ref().unwrap().sup);
        report
            .checks
            .record(format!("sup gap n={} below n={}", w[1].n, w[0].n), b, a, b < a);
    }
    if let Some(first) = done.first() {
        let term = first.bound_term.unwrap();
        let c_hat = first.gap.as_ref().unwrap().sup / (m2 * term);
        report.calibrated_constant = Some(c_hat);
        for r in done.iter().skip(1) {
            report.checks.at_most(
                format!("sup gap n={} within calibrated bound", r.n),
                r.gap.as_ref().unwrap().sup,
                c_hat * m2 * r.bound_term.unwrap(),
            );
        }
    }
    if done.len() < config.n_list.len() {
        report.checks.record("every size completed", done.len() as f64, config.n_list.len() as f64, false);
    }

    let mut notes = Vec::new();
    report.fits = Fits {
        k: fit_of(&report.records, |r| r.k.map(|k| k.mean), &mut notes, "K"),
        l: fit_of(&report.records, |r| r.l, &mut notes, "L"),
        gap: fit_of(&report.records, |r| r.gap.as_ref().map(|g| g.sup), &mut notes, "gap"),
    };
    report.notes.extend(notes);
    report
        .notes
        .push("rate fits are indicative: desk-scale n may be far from the asymptotic regime".into());

    if let Some(dir) = &config.output_dir {
        write_outputs(&report, &hopf, &means, dir)?;
    }
    Ok(report)
}

fn write_outputs(
    report: &ExperimentReport,
    hopf: &ScalarField3,
    means: &[(usize, ScalarField3)],
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    hopf.save(&dir.join("hopf"))?;
    for (n, field) in means {
        field.save(&dir.join(format!("fbar_n{n}")))?;
    }
    let mut gaps = csv::Writer::from_path(dir.join("gap.csv"))?;
    gaps.write_record(["n", "t", "gap"])?;
    for r in &report.records {
        if let Some(g) = &r.gap {
            for (t, v) in g.t.iter().zip(&g.per_slice) {
                gaps.write_record([r.n.to_string(), t.to_string(), v.to_string()])?;
            }
        }
    }
    gaps.flush()?;
    let mut terms = csv::Writer::from_path(dir.join("terms.csv"))?;
    terms.write_record(["n", "k", "k_se", "k_domain", "l", "l_domain", "sup_gap", "bound_term"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &report.records {
        terms.write_record([
            r.n.to_string(),
            opt(r.k.map(|k| k.mean)),
            opt(r.k.map(|k| k.std_error)),
            opt(r.k_domain.map(|k| k.mean)),
            opt(r.l),
            opt(r.l_domain),
            opt(r.gap.as_ref().map(|g| g.sup)),
            opt(r.bound_term),
        ])?;
    }
    terms.flush()?;
    report.write_json(&dir.join("report.json"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::Case;
    use crate::model::PriorSpec;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            points: 5,
            domain_points: 3,
            n_disorder: 8,
            dual_points: 101,
            primal_points: 501,
            seed: 3,
            ..ExperimentConfig::new(Case::Iid { prior: PriorSpec::rademacher() }, 1.0, 1.0, vec![2, 3, 4])
        }
    }

    #[test]
    fn small_run_is_complete_and_deterministic() {
        let a = run_convergence(&small()).unwrap();
        assert_eq!(a.records.len(), 3);
        assert!(a.records.iter().all(|r| r.error.is_none() && r.gap.is_some()));
        assert!(a.records.iter().all(|r| r.l.unwrap() < 1e-9));
        assert!(a.calibrated_constant.unwrap() > 0.0);
        let b = run_convergence(&small()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn degenerate_domain_is_flagged() {
        let mut c = small();
        c.m_bound = 0.0;
        let r = run_convergence(&c).unwrap();
        assert!(r.degenerate && r.records.is_empty());
    }

    #[test]
    fn failures_are_recorded_per_size() {
        let mut c = small();
        c.evaluator = crate::free_energy::Evaluator::Exact;
        c.n_list = vec![2, 40];
        let r = run_convergence(&c).unwrap();
        assert!(r.records[0].error.is_none());
        assert!(r.records[1].error.is_some());
        assert!(!r.checks.passed);
    }

    #[test]
    fn writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small();
        c.n_list = vec![2, 3];
        c.output_dir = Some(dir.path().to_path_buf());
        run_convergence(&c).unwrap();
        for f in ["report.json", "gap.csv", "terms.csv", "hopf.csv", "fbar_n3.json"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }
}
