//! Deterministic random-stream derivation.
//!
//! Every stochastic component draws from a `ChaCha8Rng` whose seed is a pure
//! function of the master seed plus a handful of integer coordinates (stream
//! tag, iteration, sentence index, ...). Work items can then be farmed out to
//! threads in any order without changing a single draw, which is what makes
//! whole runs reproducible bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags, one per independent consumer of randomness.
pub(crate) const STREAM_PRIOR: u64 = 1;
pub(crate) const STREAM_TREES: u64 = 2;
pub(crate) const STREAM_POSTERIOR: u64 = 3;
pub(crate) const STREAM_SYNTH_GRAMMAR: u64 = 4;
pub(crate) const STREAM_SYNTH_TREES: u64 = 5;
pub(crate) const STREAM_PERMUTATION: u64 = 6;

/// Derives an independent generator from `(master, stream, a, b)`.
///
/// The four coordinates are packed little-endian into the 32-byte ChaCha key,
/// so distinct coordinates give unrelated streams and the same coordinates
/// always give the same one.
pub fn substream(master: u64, stream: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&stream.to_le_bytes());
    seed[16..24].copy_from_slice(&a.to_le_bytes());
    seed[24..32].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}
