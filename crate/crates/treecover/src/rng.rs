//! Named-stream seed derivation.
//!
//! All randomness flows from one root seed through `(seed, module, index)`
//! streams, so partial re-runs of any builder are reproducible and
//! independent builders never share a stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the stream name, mixed with the seed and index.
fn mix(seed: u64, module: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in module.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^= seed;
    h = h.wrapping_mul(0x0000_0100_0000_01b3);
    h ^= index;
    // splitmix64 finalizer
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Derive the RNG for stream `(seed, module, index)`.
pub fn stream(seed: u64, module: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, module, index))
}
