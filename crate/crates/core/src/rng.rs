//! Seed derivation for reproducible, order-independent random streams.
//!
//! Every randomized routine takes an explicit `u64` seed. Independent
//! sub-streams (one per trial, per code draw, ...) are derived by hashing the
//! parent seed with a stream label and an index, so that a parallel run visits
//! exactly the same random values as a serial one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a child seed from `(seed, stream, index)`.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream.rotate_left(17)) ^ index)
}

pub fn rng_from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for the `index`-th member of the named stream.
pub fn stream_rng(seed: u64, stream: u64, index: u64) -> StreamRng {
    rng_from_seed(derive_seed(seed, stream, index))
}

/// Stream labels, kept distinct so different uses of one seed never collide.
pub mod streams {
    pub const CODE_DRAW: u64 = 1;
    pub const CANDIDATES: u64 = 2;
    pub const GAUSSIAN: u64 = 3;
    pub const RADEMACHER: u64 = 4;
    pub const SUBSET: u64 = 5;
    pub const NET_RETRY: u64 = 6;
    pub const INSTANCE: u64 = 7;
    pub const RECEIVED: u64 = 8;
}
