//! Disorder-averaged free energy of a small Rademacher model, by exact
//! enumeration and by thermodynamic integration on the same draws.
//!
//! cargo run --release --example exact_free_energy

use hjlab::free_energy::{free_energy_mc, Evaluator, McmcParams};
use hjlab::{ModelConfig, PriorSpec, Result};

fn main() -> Result<()> {
    let config = ModelConfig::new(4, 1.0)?;
    let prior = PriorSpec::rademacher();
    let mcmc = McmcParams {
        samples: 400,
        ..Default::default()
    };
    println!("{:>5} {:>12} {:>24} {:>24}", "t", "h", "enumeration", "integration");
    for (t, h) in [(0.0, [0.5, 0.5]), (0.5, [0.25, 0.75]), (1.0, [1.0, 1.0])] {
        let exact = free_energy_mc(&config, &prior, t, h, 32, &mcmc, Evaluator::Exact, 11)?;
        let ti = free_energy_mc(&config, &prior, t, h, 32, &mcmc, Evaluator::Integration, 11)?;
        println!(
            "{t:>5.2} {:>12} {:>13.6} ± {:.1e} {:>13.6} ± {:.1e}",
            format!("{h:?}"),
            exact.mean,
            exact.std_error,
            ti.mean,
            ti.std_error
        );
    }
    Ok(())
}
