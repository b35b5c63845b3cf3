//! Nishimori identities and the overlap formulas for the derivatives of the
//! averaged free energy, on an enumerable model.
//!
//! cargo run --release --example identities

use hjlab::free_energy::{nishimori_check, overlap_fd_check, NishimoriStatistic, Sampler};
use hjlab::{ModelConfig, PriorSpec, Result};

fn main() -> Result<()> {
    let config = ModelConfig::new(3, 1.0)?;
    let prior = PriorSpec::rademacher();
    for s in NishimoriStatistic::ALL {
        let r = nishimori_check(&config, &prior, 0.6, [0.3, 0.8], s, 4.0, 100, 5, &Sampler::Exact)?;
        println!("{r}");
        for note in &r.notes {
            println!("    {note}");
        }
    }
    // Central differences of F̄ against Gibbs overlaps, antithetic pairs.
    let r = overlap_fd_check(&config, &prior, &[(1.0, [1.0, 1.0])], 4000, 9, 1e-3, 5e-3)?;
    println!("{r}");
    for item in &r.items {
        println!("    {} = {:.2e} (bound {:.1e})", item.label, item.value, item.bound);
    }
    Ok(())
}
