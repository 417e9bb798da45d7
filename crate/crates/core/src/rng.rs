//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha20Rng`] seeded with
//! `seed_from_u64(seed)` and then moved onto a stream id with
//! `set_stream`. The stream id is derived from a list of integer tags
//! (replicate index, batch index, purpose) by folding them through the
//! SplitMix64 finalizer, so a replicate or batch always reads the same
//! numbers no matter which thread produces it or in what order.
//!
//! Standard normals come from `rand_distr::StandardNormal` (ziggurat) and
//! uniforms from `Rng::random::<f64>()`, both as implemented by the
//! `rand 0.9` / `rand_distr 0.5` releases.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// Purpose tags keep independent consumers of one seed apart.
pub mod purpose {
    pub const SAMPLE: u64 = 1;
    pub const LABEL_NOISE: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const INIT: u64 = 4;
    pub const BATCH: u64 = 5;
    pub const MONTE_CARLO: u64 = 6;
    pub const REPLICATE: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for a tag path. The empty path maps to stream 0.
pub fn stream_id(tags: &[u64]) -> u64 {
    tags.iter()
        .fold(0u64, |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn substream(seed: u64, tags: &[u64]) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(tags));
    rng
}

/// Derive a child seed, for APIs that take a plain `u64` seed.
pub fn child_seed(seed: u64, tags: &[u64]) -> u64 {
    splitmix64(seed ^ stream_id(tags).rotate_left(17))
}
