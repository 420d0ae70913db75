//! Deterministic random streams.
//!
//! Every replication `i` of a Monte Carlo run draws from its own ChaCha8
//! stream, selected by `(seed, i)`. Streams are independent of how work is
//! divided between threads, so results do not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct StreamFactory {
    base: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator positioned at the start of stream `index`.
    #[inline]
    pub fn stream(&self, index: u64) -> StreamRng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng
    }
}
