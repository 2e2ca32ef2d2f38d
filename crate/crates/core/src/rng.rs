//! Seed derivation for order-independent random streams.
//!
//! Every random decision is keyed by `(master seed, domain, index)` so that
//! results do not depend on the order in which work items are processed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream domains; each distinct use of randomness gets its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Circuit = 1,
    Noise = 2,
    Shot = 3,
    QDrift = 4,
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for item `index` of `domain` under `master`.
pub fn derive_seed(master: u64, domain: Domain, index: u64) -> u64 {
    let a = mix(master ^ 0x9e37_79b9_7f4a_7c15);
    let b = mix(a ^ (domain as u64).wrapping_mul(0xd1b5_4a32_d192_ed03));
    mix(b ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform double in `[0, 1)` from the top 53 bits.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
pub fn next_unit(rng: &mut ChaCha8Rng) -> f64 {
    unit_f64(rng.next_u64())
}

/// The uniform a sequential reader of `stream(seed)` sees at draw `position`.
pub fn uniform_at(seed: u64, position: u64) -> f64 {
    let mut rng = stream(seed);
    rng.set_word_pos(2 * position as u128);
    next_unit(&mut rng)
}
