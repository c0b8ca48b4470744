//! Seeded, splittable random streams.
//!
//! Every experiment derives its randomness from a single `u64` seed. Work that
//! fans out (trials, sections, trajectories) takes a numbered stream of that
//! seed, so results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream `0` of `seed`.
pub fn seeded(seed: u64) -> Rng {
    stream(seed, 0)
}

/// Independent stream number `id` of `seed`.
pub fn stream(seed: u64, id: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Two-level split, for nested fan-out (e.g. cell × trial).
pub fn substream(seed: u64, outer: u64, inner: u64) -> Rng {
    // outer ids are spread over the high half of the stream space
    stream(seed, (outer << 32) ^ inner ^ (1 << 63))
}
