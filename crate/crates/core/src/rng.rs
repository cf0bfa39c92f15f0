//! Seed splitting.
//!
//! Every random stream in a run derives from one root seed. A child seed is
//! `mix(mix(root ^ fnv1a(label)) ^ index)` where `mix` is the splitmix64
//! finalizer, so the stream used for, say, generation 7 / lineage 12 does not
//! depend on how many other streams were drawn before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(label: &str) -> u64 {
    label
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// splitmix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `root`, a path label and an index.
pub fn split(root: u64, label: &str, index: u64) -> u64 {
    mix(mix(root ^ fnv1a(label)) ^ index)
}

/// Derive a child seed along a label and two indices (e.g. generation, lineage).
pub fn split2(root: u64, label: &str, a: u64, b: u64) -> u64 {
    mix(split(root, label, a) ^ mix(b))
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}
