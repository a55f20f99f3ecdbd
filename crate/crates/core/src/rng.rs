//! Counter-based pseudo-random numbers for reproducible test fields.
//!
//! The scheme is fixed so that the same `(seed, counter)` pair produces the
//! same bits on every platform: draw `i` of stream `seed` is
//! `splitmix64(splitmix64(seed) + i)` with wrapping arithmetic. Uniform
//! doubles use the top 53 bits.

pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn draw(seed: u64, counter: u64) -> u64 {
    splitmix64(splitmix64(seed).wrapping_add(counter))
}

/// Uniform sample in `[0, 1)`.
pub(crate) fn unit(seed: u64, counter: u64) -> f64 {
    (draw(seed, counter) >> 11) as f64 / (1u64 << 53) as f64
}

/// Uniform sample in `[-1, 1)`.
pub(crate) fn symmetric(seed: u64, counter: u64) -> f64 {
    2.0 * unit(seed, counter) - 1.0
}
