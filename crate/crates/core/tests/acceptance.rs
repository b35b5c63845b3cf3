//! End-to-end acceptance runs. Each test prints one `PASS`/`FAIL` line and
//! asserts the same outcome.
//!
//! cargo test --release --test acceptance -- --nocapture --test-threads 1

use std::sync::OnceLock;
use std::time::Instant;

use hjlab::experiment::{fit_rate, run_convergence, Case, ExperimentConfig, ExperimentReport};
use hjlab::free_energy::{
    approximate_hj_residual_check, estimate_l, derivative_bounds, nishimori_check, overlap_fd_check, psi_iid,
    psi_spherical, Evaluator, McmcParams, NishimoriStatistic, ReplicaFields, ResidualOptions, Sampler,
};
use hjlab::hj::{
    fd_solve_initial, fenchel_moreau_check, hopf_solve, hopf_weak_checks, semigroup_check, sup_gap_against, ConvexFn1D,
    HopfSolution, InitialCondition, SemigroupOptions, Tail, WeakOptions,
};
use hjlab::{CheckReport, GridSpec3, ModelConfig, PriorSpec};

fn verdict(name: &str, passed: bool, detail: &str, started: Instant) {
    let status = if passed { "PASS" } else { "FAIL" };
    let seconds = started.elapsed().as_secs_f64();
    if detail.is_empty() {
        println!("{status} {name} ({seconds:.1}s)");
    } else {
        println!("{status} {name} ({detail}; {seconds:.1}s)");
    }
}

fn sci(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

fn failures(report: &CheckReport) -> String {
    report
        .items
        .iter()
        .filter(|i| !i.passed)
        .take(3)
        .map(|i| format!("{}: {:.3e} vs {:.3e}", i.label, i.value, i.bound))
        .collect::<Vec<_>>()
        .join("; ")
}

fn merged(name: &str, parts: Vec<CheckReport>) -> CheckReport {
    let mut report = CheckReport::new(name);
    for p in parts {
        report.merge(p);
    }
    report
}

#[test]
fn identity_suite() {
    let started = Instant::now();
    let prior = PriorSpec::rademacher();
    let grid = GridSpec3::cube(1.0, 9).unwrap();
    let mut parts = Vec::new();
    for n in [3usize, 4] {
        let config = ModelConfig::new(n, 1.0).unwrap();
        for (t, h) in [(0.5, [0.25, 0.75]), (1.0, [1.0, 1.0]), (0.125, [0.625, 0.0])] {
            for s in NishimoriStatistic::ALL {
                parts.push(nishimori_check(&config, &prior, t, h, s, 4.0, 200, 11, &Sampler::Exact).unwrap());
            }
        }
        let points = [(0.75, [0.75, 1.0]), (1.0, [0.75, 0.75]), (0.875, [1.0, 0.875])];
        parts.push(overlap_fd_check(&config, &prior, &points, 200_000, 13, 1e-3, 1e-3).unwrap());
        let fields =
            ReplicaFields::compute(&config, &prior, &grid, 400, 17, &McmcParams::default(), Evaluator::Exact).unwrap();
        parts.push(derivative_bounds(&fields, 1.0, None).unwrap());
    }
    let report = merged("identity suite", parts);
    let detail = format!("{} checks {}", report.items.len(), failures(&report));
    verdict("identities", report.passed, detail.trim(), started);
    assert!(report.passed, "{report}");
}

#[test]
fn residual_inequality() {
    let started = Instant::now();
    let config = ModelConfig::new(4, 1.0).unwrap();
    let grid = GridSpec3::cube(1.0, 9).unwrap();
    let fields = ReplicaFields::compute(
        &config,
        &PriorSpec::rademacher(),
        &grid,
        400,
        3,
        &McmcParams::default(),
        Evaluator::Exact,
    )
    .unwrap();
    let report = approximate_hj_residual_check(&fields, ResidualOptions::default()).unwrap();
    let detail = format!("{} interior points {}", report.items.len(), failures(&report));
    verdict("residual inequality", report.passed, detail.trim(), started);
    assert!(report.passed, "{report}");
}

#[test]
fn analytic_solutions() {
    let started = Instant::now();
    let mut report = CheckReport::new("analytic suite");

    let zero = HopfSolution::from_initial(&InitialCondition::Zero, 1.0, 1.0, 401, 101).unwrap();
    let field = zero.field(&GridSpec3::cube(1.0, 9).unwrap()).unwrap();
    report.at_most("zero data: max |f|", field.values.iter().fold(0.0f64, |m, v| m.max(v.abs())), 0.0);

    let plane = [
        ConvexFn1D::from_fn(6.0, 61, Tail::Linear, |y| 0.3 * y).unwrap(),
        ConvexFn1D::from_fn(6.0, 61, Tail::Linear, |y| 0.7 * y).unwrap(),
    ];
    let v = hopf_solve(&plane, 2.0, &[1.0, 1.0]).unwrap();
    report.at_most("plane wave at t=2, h=(1,1)", (v - 1.42).abs(), 1e-8);

    let spherical = HopfSolution::from_initial(&InitialCondition::Spherical { alpha: 1.0 }, 1.0, 1.0, 4001, 401).unwrap();
    let dz = spherical.dual_steps().into_iter().fold(0.0, f64::max);
    for i in 0..=8 {
        for j in 0..=8 {
            let h = [i as f64 / 8.0, j as f64 / 8.0];
            let err = (spherical.evaluate(0.0, &h).unwrap() - psi_spherical(1.0, h).unwrap()).abs();
            report.at_most(format!("t=0 h=({:.3},{:.3})", h[0], h[1]), err, 2.0 * dz * h[0].max(h[1]) + 1e-12);
        }
    }

    for knots in [vec![0.0, 0.0, 0.25, 1.0, 2.0], vec![0.0, 0.5, 1.0, 2.0, 3.0, 4.5], vec![1.0, 1.0, 1.0]] {
        let h_max = (knots.len() - 1) as f64 * 0.5;
        let u = ConvexFn1D::new(h_max, knots, Tail::Linear).unwrap();
        // Slopes are multiples of 0.5, all on the dual grid.
        let n_z = (u.last_slope() / 0.5).round() as usize * 4 + 1;
        report.merge(fenchel_moreau_check(&u, n_z));
    }

    verdict("analytic solutions", report.passed, &failures(&report), started);
    assert!(report.passed, "{report}");
}

#[test]
fn solver_cross_validation() {
    let started = Instant::now();
    let ic = InitialCondition::Spherical { alpha: 1.0 };
    let solution = HopfSolution::from_initial(&ic, 1.0, 1.0, 4001, 401).unwrap();
    let mut report = CheckReport::new("Hopf against Lax-Friedrichs");
    let mut gaps = Vec::new();
    for n in [31usize, 61, 121] {
        // Lax-Friedrichs on [0, 3]² so the boundary does not reach [0, 1]².
        let fd = fd_solve_initial(&ic, 3.0, n, 1.0, 5, 0.45).unwrap();
        let inner = (n - 1) / 3 + 1;
        let reference = solution.field(&GridSpec3::new(1.0, 1.0, 5, inner).unwrap()).unwrap();
        let gap = sup_gap_against(&fd, &reference).unwrap();
        let dh = fd.grid.dh();
        gaps.push(gap);
        report.at_most(format!("dh={dh:.4} sup gap / dh"), gap / dh, 2.0);
    }
    for w in gaps.windows(2) {
        let ratio = w[0] / w[1];
        report.at_least(format!("halving ratio {ratio:.3} above 1.4"), ratio, 1.4);
        report.at_most(format!("halving ratio {ratio:.3} below 2.6"), ratio, 2.6);
    }
    let detail = format!("gaps [{}] {}", sci(&gaps), failures(&report));
    verdict("Hopf vs Lax-Friedrichs", report.passed, detail.trim(), started);
    assert!(report.passed, "{report}");
}

#[test]
fn weak_solution_properties() {
    let started = Instant::now();
    let grid = GridSpec3::cube(1.0, 17).unwrap();
    let axis: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut report = CheckReport::new("weak-solution suite");
    let mut controls = Vec::new();
    for ic in [
        InitialCondition::Spherical { alpha: 1.0 },
        InitialCondition::Iid {
            prior: PriorSpec::rademacher(),
            alpha: 1.0,
        },
    ] {
        let solution = HopfSolution::from_initial(&ic, 1.0, 1.0, 4001, 401).unwrap();
        let mut field = solution.field(&grid).unwrap();
        report.merge(hopf_weak_checks(&solution, &field, WeakOptions::default()).unwrap());
        report.merge(semigroup_check(&solution, 0.5, 0.5, &axis, SemigroupOptions::default()).unwrap());
        field.values[grid.index(8, 8, 8)] -= 0.1;
        let damaged = hopf_weak_checks(&solution, &field, WeakOptions::default()).unwrap();
        controls.push(damaged.passed);
        report.at_most("corrupted field is rejected", f64::from(u8::from(damaged.passed)), 0.0);
    }
    let detail = format!("{} checks, corrupted fields passed: {controls:?} {}", report.items.len(), failures(&report));
    verdict("weak-solution properties", report.passed, detail.trim(), started);
    assert!(report.passed, "{report}");
}

fn convergence_run() -> &'static ExperimentReport {
    static RUN: OnceLock<ExperimentReport> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut config =
            ExperimentConfig::new(Case::Iid { prior: PriorSpec::rademacher() }, 1.0, 1.0, vec![4, 6, 8, 10]);
        config.n_disorder = 200;
        config.seed = 2024;
        run_convergence(&config).unwrap()
    })
}

#[test]
fn convergence_experiment() {
    let started = Instant::now();
    let report = convergence_run();
    let gaps: Vec<f64> = report.records.iter().filter_map(|r| r.gap.as_ref().map(|g| g.sup)).collect();
    let detail = format!(
        "sup gaps [{}], calibrated C {} {}",
        sci(&gaps),
        sci(&report.calibrated_constant.into_iter().collect::<Vec<_>>()),
        failures(&report.checks)
    );
    verdict("convergence experiment", report.checks.passed, detail.trim(), started);
    assert!(report.checks.passed, "{}", report.checks);
}

#[test]
fn rate_fits() {
    let started = Instant::now();
    let mut report = CheckReport::new("rate fits");
    match &convergence_run().fits.k {
        Some(k) => {
            report.at_least("K slope above -0.8", k.exponent, -0.8);
            report.at_most("K slope below -0.3", k.exponent, -0.3);
        }
        None => {
            report.at_most("K fit available", 1.0, 0.0);
        }
    }
    let axis: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    let pairs: Vec<(f64, f64)> = [4usize, 6, 8, 10, 16, 32, 64]
        .iter()
        .map(|&n| {
            let c = ModelConfig::new(n, 1.0).unwrap();
            (n as f64, estimate_l(&c, &PriorSpec::spherical(), |h| psi_spherical(1.0, h), &axis).unwrap())
        })
        .collect();
    let l = fit_rate(&pairs).unwrap();
    report.at_least("spherical L slope above -0.7", l.exponent, -0.7);
    report.at_most("spherical L slope below -0.3", l.exponent, -0.3);
    let detail = format!(
        "K slope {:.3?}, spherical L slope {:.3} {}",
        convergence_run().fits.k.as_ref().map(|k| k.exponent),
        l.exponent,
        failures(&report)
    );
    verdict("rate fits", report.passed, detail.trim(), started);
    assert!(report.passed, "{report}");
}

#[test]
fn iid_square_gap_vanishes() {
    let started = Instant::now();
    let prior = PriorSpec::rademacher();
    let axis: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
    let mut report = CheckReport::new("i.i.d. L");
    for n in [2usize, 4, 6, 8, 10, 16, 32, 64] {
        let c = ModelConfig::new(n, 1.0).unwrap();
        let l = estimate_l(&c, &prior, |h| psi_iid(&prior, 1.0, h), &axis).unwrap();
        report.at_most(format!("n={n} L"), l, 1e-9);
    }
    let worst = report.items.iter().fold(0.0f64, |m, i| m.max(i.value));
    verdict("i.i.d. L vanishes", report.passed, &format!("max L {worst:.2e}"), started);
    assert!(report.passed, "{report}");
}
