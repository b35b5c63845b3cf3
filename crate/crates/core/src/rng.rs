//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! 64-bit seed. Replica `r` of a run with seed `s` uses seed `s ^ r`, so any
//! replica can be regenerated in isolation and in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn replica_seed(seed: u64, replica: usize) -> u64 {
    seed ^ replica as u64
}

/// Independent sub-stream for auxiliary randomness of a replica (MCMC chains).
pub fn chain_stream(seed: u64, chain: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain + 1);
    rng
}
