//! Deterministic sub-seeds derived from a master seed and a stage tag.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the stage named `tag`; independent of any other tag.
pub fn sub_seed(master: u64, tag: &str) -> u64 {
    splitmix64(master ^ splitmix64(fnv1a(tag)))
}

/// Seed for the `index`-th item of the stage named `tag`.
pub fn indexed_seed(master: u64, tag: &str, index: u64) -> u64 {
    splitmix64(sub_seed(master, tag) ^ splitmix64(index.wrapping_add(1)))
}

pub fn stage_rng(master: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(master, tag))
}
