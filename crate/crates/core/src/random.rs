//! Seeded random sources shared by samplers and generators.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator used everywhere a seed is accepted.
pub type RandomSource = ChaCha12Rng;

pub fn seeded(seed: u64) -> RandomSource {
    ChaCha12Rng::seed_from_u64(seed)
}
