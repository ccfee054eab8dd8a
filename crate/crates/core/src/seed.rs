//! Seed derivation.

/// SplitMix64 finaliser: a bijective 64-bit mixer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-point seed used by sweeps: `base XOR splitmix64(point)`.
pub fn point_seed(base: u64, point: u64) -> u64 {
    base ^ splitmix64(point)
}

/// Hashes a sequence of words into one.
pub fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(0u64, |acc, &w| splitmix64(acc ^ w))
}
