//! Seeded random streams.
//!
//! Every stochastic routine takes a caller-owned generator. The concrete
//! generator is ChaCha8 (`rand_chacha`), seeded through `seed_from_u64`;
//! Monte Carlo trial `i` uses seed `base.wrapping_add(i)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for Monte Carlo trial `trial` under base seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> SimRng {
    rng_from_seed(seed.wrapping_add(trial))
}
