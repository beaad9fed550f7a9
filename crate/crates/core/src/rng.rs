//! Deterministic random-stream derivation.
//!
//! Every parallel unit of work (a chain, a replication, a window) owns a
//! generator seeded from `(base seed, index)`, so results never depend on
//! which thread ran which unit or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Mixes a base seed with a unit index into an independent child seed.
///
/// Two rounds of the splitmix64 finalizer; distinct `(base, index)` pairs map
/// to well-separated seeds even when both inputs are small consecutive integers.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    for _ in 0..2 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for unit `index` under `base`.
pub fn stream(base: u64, index: u64) -> SimRng {
    rng_from_seed(derive_seed(base, index))
}

/// Well-known sub-stream tags so that different consumers of one master seed
/// never share a stream.
pub mod tags {
    pub const CHAINS: u64 = 0x4348_4149_4E53;
    pub const CHAIN_START: u64 = 0x0053_5441_5254;
    pub const TUNING: u64 = 0x5455_4E45;
    pub const REPLICATIONS: u64 = 0x5245_504C;
    pub const NOISE: u64 = 0x004E_4F49_5345;
    pub const SCHEDULE: u64 = 0x0053_4348_4544;
    pub const SYNTHETIC: u64 = 0x5359_4E54;
}
