//! Deterministic random streams.
//!
//! Every randomized routine takes a 64-bit seed and draws from ChaCha8, whose
//! output stream is fixed by its specification and identical on every platform.
//! Independent sub-streams (restarts, chains, rounding draws) use the ChaCha
//! stream counter rather than reseeding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `index` of the generator family keyed by `seed`.
pub fn substream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
