//! Deterministic seed derivation for independent random streams.
//!
//! Every generator in the workspace is a ChaCha stream seeded through
//! [`mix`], so replicates, datasets and per-process event streams stay
//! independent and reproducible regardless of execution order.

/// 64-bit fractional golden-ratio constant; spreads consecutive stream
/// indices uniformly across the seed space.
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Derive a child seed from a base seed and a stream index.
pub fn mix(base: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over the offset seed
    let mut z = base ^ stream.wrapping_mul(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a seed from a base and several stream coordinates.
pub fn mix_all(base: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(base, |acc, &c| mix(acc, c.wrapping_add(1)))
}
