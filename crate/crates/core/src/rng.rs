//! Seed derivation.
//!
//! All randomness flows from one root seed. A subsystem obtains its own
//! stream as `rng_for(root, stream_id)`; the id constants below are the
//! documented splitting scheme, so any subsystem can be re-run in isolation
//! from the root seed alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Policy/value network initialization.
pub const STREAM_NET_INIT: u64 = 1;
/// Minibatch shuffling across epochs.
pub const STREAM_SHUFFLE: u64 = 2;
/// Gaussian action noise during rollouts.
pub const STREAM_ACTION: u64 = 3;
/// Randomized bound-verification instances.
pub const STREAM_VERIFY: u64 = 4;
/// Environment instance for actor `i` uses `STREAM_ACTOR_BASE + i`.
pub const STREAM_ACTOR_BASE: u64 = 100;

/// SplitMix64 finalizer; the standard 64-bit mixing constants.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of a named sub-stream from the root seed.
pub fn seed_stream(root: u64, stream_id: u64) -> u64 {
    splitmix64(root.wrapping_add(splitmix64(stream_id)))
}

/// RNG for a named sub-stream of `root`.
pub fn rng_for(root: u64, stream_id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_stream(root, stream_id))
}
