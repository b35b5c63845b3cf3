//! The limits ψ of the decoupled free energy and how fast finite sizes
//! approach them.
//!
//! cargo run --release --example initial_conditions

use hjlab::experiment::fit_rate;
use hjlab::free_energy::{estimate_l, psi_iid, psi_spherical};
use hjlab::{ModelConfig, PriorSpec, Result};

fn main() -> Result<()> {
    let axis: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    let rad = PriorSpec::rademacher();
    println!("psi at h = (1, 1): iid {:.6}, spherical {:.6}", psi_iid(&rad, 1.0, [1.0, 1.0])?, psi_spherical(1.0, [1.0, 1.0])?);

    let mut pairs = Vec::new();
    println!("{:>5} {:>14} {:>14}", "n", "L iid", "L spherical");
    for n in [8usize, 16, 32, 64] {
        let c = ModelConfig::new(n, 1.0)?;
        let l_iid = estimate_l(&c, &rad, |h| psi_iid(&rad, 1.0, h), &axis)?;
        let l_sph = estimate_l(&c, &PriorSpec::spherical(), |h| psi_spherical(1.0, h), &axis)?;
        println!("{n:>5} {l_iid:>14.3e} {l_sph:>14.6e}");
        pairs.push((n as f64, l_sph));
    }
    let fit = fit_rate(&pairs)?;
    println!("spherical L ~ n^{:.3} (95% CI {:.3} .. {:.3})", fit.exponent, fit.ci().0, fit.ci().1);
    Ok(())
}
