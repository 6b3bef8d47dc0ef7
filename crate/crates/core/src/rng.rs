//! Deterministic random streams.
//!
//! Every run owns one ChaCha8 generator keyed by `(seed, stream_id)`. ChaCha
//! exposes a 64-bit stream selector next to the 256-bit key, so two streams
//! of the same seed never overlap, whatever the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_stream(seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream id for replica `replica` of grid point `point`.
pub fn replica_stream(point: usize, replica: usize) -> u64 {
    ((point as u64) << 32) | (replica as u64 & 0xffff_ffff)
}
