//! Named, independent random streams derived from one run seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Policy = 1,
    Environment = 2,
    Food = 3,
    Prey = 4,
}

/// Creates the generator for one consumer. Every stream shares the key
/// derived from `seed` but uses its own ChaCha stream id, so draws on one
/// stream never shift another.
pub fn stream(seed: u64, which: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// The full set of streams owned by one run.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub policy: StreamRng,
    pub environment: StreamRng,
    pub food: StreamRng,
    pub prey: StreamRng,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            policy: stream(seed, Stream::Policy),
            environment: stream(seed, Stream::Environment),
            food: stream(seed, Stream::Food),
            prey: stream(seed, Stream::Prey),
        }
    }
}
