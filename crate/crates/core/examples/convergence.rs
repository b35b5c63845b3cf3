//! A short convergence run: finite-size free energies against the Hopf
//! solution, with the error terms of the bound and rate fits. Files go to
//! the directory given as the first argument, if any.
//!
//! cargo run --release --example convergence -- /tmp/hjlab-run

use hjlab::experiment::{run_convergence, Case, ExperimentConfig};
use hjlab::{PriorSpec, Result};

fn main() -> Result<()> {
    let mut config = ExperimentConfig::new(
        Case::Iid {
            prior: PriorSpec::rademacher(),
        },
        1.0,
        1.0,
        vec![3, 4, 5, 6],
    );
    config.points = 9;
    config.n_disorder = 60;
    config.seed = 1;
    config.output_dir = std::env::args().nth(1).map(Into::into);
    let report = run_convergence(&config)?;
    println!("{:>4} {:>12} {:>12} {:>12}", "n", "sup gap", "K", "bound term");
    for r in &report.records {
        println!(
            "{:>4} {:>12.4e} {:>12.4e} {:>12.4e}",
            r.n,
            r.gap.as_ref().map_or(f64::NAN, |g| g.sup),
            r.k.map_or(f64::NAN, |k| k.mean),
            r.bound_term.unwrap_or(f64::NAN)
        );
    }
    println!("calibrated constant {:?}", report.calibrated_constant);
    println!("{}", report.checks);
    if let Some(fit) = report.fits.k {
        println!("K ~ n^{:.3} ± {:.3}", fit.exponent, fit.ci_half_width);
    }
    Ok(())
}
