//! Seedable, splittable random streams for reproducible Monte Carlo runs.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream for one trial: `(master seed, trial index)` selects a
/// distinct ChaCha stream, so trials can run in parallel and still be
/// bit-reproducible in any execution order.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}
