//! Seed-sequence splitting. Every stochastic draw in the crate comes from a
//! ChaCha stream keyed by `(master seed, stream id)`, so results never depend
//! on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named random streams derived from a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamId {
    Bits = 1,
    Noise = 2,
    CalibrationBits = 3,
    CalibrationNoise = 4,
    PhaseError = 5,
    FeedError = 6,
    Oracle = 7,
}

pub fn stream(seed: u64, id: StreamId) -> ChaCha8Rng {
    substream(seed, id as u64)
}

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream `id` for the `index`-th independent job under one master seed.
pub fn indexed_stream(seed: u64, id: StreamId, index: u64) -> ChaCha8Rng {
    substream(seed, (index << 8) | id as u64)
}
