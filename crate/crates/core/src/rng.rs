//! Seeded, counter-based random streams.
//!
//! Every chain or worker chunk draws from its own ChaCha stream, so results
//! depend only on `(seed, stream)` and not on the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
