//! Keyed random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream selected by a
//! `(seed, domain, key)` triple. ChaCha is counter based, so a stream can be
//! opened for any key without touching any other stream: draws for different
//! rounds, vertices or attempts are independent of evaluation order and can
//! be replayed in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains. Distinct domains never share a stream even for equal keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Generator = 1,
    Activation = 2,
    Partition = 3,
    Finisher = 4,
    Probe = 5,
    ListChoice = 6,
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Opens the stream for `(seed, domain, key)`.
pub fn stream(seed: u64, domain: Domain, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ mix(domain as u64)));
    rng.set_stream(key);
    rng
}

/// A child seed for sub-run `tag` of a run seeded with `seed`.
pub fn derive(seed: u64, tag: u64) -> u64 {
    mix(seed ^ mix(tag.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// Packs two 32-bit coordinates into a stream key.
pub fn key2(a: u32, b: u32) -> u64 {
    ((a as u64) << 32) | b as u64
}
