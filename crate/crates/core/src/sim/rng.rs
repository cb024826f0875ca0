//! Reproducible random streams. A stream is a ChaCha8 generator keyed by
//! the seed and positioned on its own stream index, so batch `b` always
//! sees the same numbers regardless of which worker runs it.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub type Stream = ChaCha8Rng;

/// Independent reproducible generator for `(seed, stream_index)`.
pub fn rng_stream(seed: u64, stream_index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_index);
    rng
}

/// Uniform draw on `[0, 1)` with 53 random bits.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
