//! Reproducible random number generation.
//!
//! All randomness flows from a single master seed through ChaCha12, a
//! counter-based generator. Independent streams for parallel or multi-part
//! work are derived with [`split_stream`], which maps (seed, stream index)
//! to disjoint ChaCha streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha12Rng;

/// Root generator for a master seed (stream 0).
pub fn master(seed: u64) -> Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Derives an independent stream from the master seed. Streams with
/// different indices never overlap; one stream must be owned by one
/// execution context at a time.
pub fn split_stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
