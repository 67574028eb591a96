//! Deterministic RNG stream derivation from a single master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for `stream` under `seed`. Streams never overlap,
/// so work split across threads by stream index reproduces serial output.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
