//! Seed derivation. Every random stream is keyed by a master seed, a purpose
//! tag and an index, so streams never overlap regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Purpose tags for derived streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Rollout = 1,
    Sampling = 2,
    Split = 3,
    Init = 4,
    Training = 5,
    ValidationStates = 6,
    EvalStates = 7,
    GridConfig = 8,
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(master ^ tag') ^ index)` where `tag'` spreads the
/// purpose tag over the high bits.
pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    let tagged = master ^ (stream as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    splitmix64(splitmix64(tagged) ^ index)
}

pub fn rng_for(master: u64, stream: Stream, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master, stream, index))
}
