//! Seed plumbing.
//!
//! Two kinds of randomness are used throughout the crate:
//! keyed draws, where a uniform is a pure function of `(seed, key...)` so that
//! results do not depend on iteration order, and sequential ChaCha streams for
//! choices that are inherently ordered (shuffles, uniform picks).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash an ordered list of words into one 64-bit key.
#[inline]
pub fn keyed(words: &[u64]) -> u64 {
    words.iter().fold(0x243F_6A88_85A3_08D3u64, |acc, &w| mix64(acc ^ mix64(w)))
}

/// Uniform in [0, 1) from a key, using the top 53 bits.
#[inline]
pub fn unit(key: u64) -> f64 {
    (key >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Child seed for a named stage, so independent stages never share a stream.
pub fn derive(seed: u64, stage: &str, index: u64) -> u64 {
    let tag = stage.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
    keyed(&[seed, tag, index])
}

pub fn stream(seed: u64, stage: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, stage, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_is_in_range_and_spread() {
        let mut lo = 0;
        for i in 0..10_000u64 {
            let u = unit(keyed(&[7, i]));
            assert!((0.0..1.0).contains(&u));
            if u < 0.5 {
                lo += 1;
            }
        }
        assert!((4_700..5_300).contains(&lo), "{lo}");
    }

    #[test]
    fn derive_separates_stages() {
        assert_ne!(derive(1, "nibble", 0), derive(1, "greedy", 0));
        assert_ne!(derive(1, "nibble", 0), derive(1, "nibble", 1));
        assert_eq!(derive(1, "nibble", 0), derive(1, "nibble", 0));
    }
}
