//! Seed derivation. Every random draw in the pipeline comes from a ChaCha8
//! stream whose seed is derived from a parent seed and a fixed stream tag, so
//! any record can be regenerated from `(master_seed, index)` alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed for `stream` from `seed`.
pub fn derive(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(stream.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream tags used when splitting seeds. Changing any value changes every
/// generated corpus.
pub mod stream {
    pub const PAYLOAD: u64 = 1;
    pub const MODULATOR: u64 = 2;
    pub const SCENARIO: u64 = 3;
    pub const FADING: u64 = 4;
    pub const NOISE: u64 = 5;
    pub const DRIFT: u64 = 6;
    pub const WINDOW: u64 = 7;
    pub const CHANNEL: u64 = 8;
    pub const SOURCE: u64 = 9;
}
