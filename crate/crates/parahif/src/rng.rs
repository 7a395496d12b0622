//! Counter-based deterministic random numbers.
//!
//! Every random quantity in the crate (coefficient bump centers, power
//! iteration start vectors, test vectors) is a pure function of a `(seed,
//! counter)` pair, so runs are reproducible bit for bit across platforms and
//! independent of evaluation order. The mixer is SplitMix64: the counter is
//! folded into the seed by a golden-ratio multiple, then avalanched.

/// SplitMix64 finalizer over `seed` and counter `i`.
pub fn mix(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn unit_f64(seed: u64, i: u64) -> f64 {
    (mix(seed, i) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[-1, 1)`, used for start vectors and test inputs.
pub fn signed_f64(seed: u64, i: u64) -> f64 {
    2.0 * unit_f64(seed, i) - 1.0
}
