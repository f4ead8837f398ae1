//! Seed derivation for reproducible, order-independent randomness.
//!
//! Every randomized operation derives its own ChaCha stream from a caller
//! seed and a fixed operation tag, so adding or reordering operations never
//! perturbs the draws of another. ChaCha is counter-based: the i-th draw of
//! a stream is a pure function of (seed, tag, i).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// 64-bit FNV-1a over a byte string.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 finalizer; bijective on u64.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic RNG stream keyed by `(seed, tag)`.
pub fn stream(seed: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed ^ fnv1a(tag.as_bytes())))
}

/// Deterministic RNG stream keyed by `(seed, tag, index)`, for per-member
/// or per-run fan-out.
pub fn substream(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(seed ^ fnv1a(tag.as_bytes())) ^ index))
}

/// Derives a child seed; use when an operation passes seeds on to
/// sub-operations that do their own `stream` derivation.
pub fn child_seed(seed: u64, tag: &str) -> u64 {
    mix(seed ^ fnv1a(tag.as_bytes()))
}
