//! Counter-based random streams.
//!
//! Every stochastic routine derives its generator from `(seed, index)` so
//! results do not depend on how work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for the `index`-th independent stream under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed for an independent sub-experiment.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    stream(seed, index).random()
}
