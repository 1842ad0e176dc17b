//! Deterministic seed derivation.
//!
//! Every random choice in the crate flows from one experiment seed through
//! [`derive`], so reruns are byte-identical and independent of iteration
//! order. std's `DefaultHasher` is deliberately avoided: its output may change
//! between Rust releases.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and a path of string tags.
pub fn derive(base: u64, path: &[&str]) -> u64 {
    let mut h = FNV_OFFSET;
    for part in path {
        h = fnv1a(h, part.as_bytes());
        h = fnv1a(h, &[0xff]); // separator so ["ab","c"] != ["a","bc"]
    }
    splitmix64(base ^ h)
}

/// Seeded generator for the given derivation path.
pub fn rng(base: u64, path: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, path))
}
