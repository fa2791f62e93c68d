//! Seeded random streams.
//!
//! Every trial owns one ChaCha8 generator per concern. Streams are derived
//! from the trial seed, so changing how many draws one concern makes never
//! perturbs another (e.g. the ε schedule is identical across strategies for a
//! given seed).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 0,
    Schedule = 1,
    Acting = 2,
    Environment = 3,
    Replay = 4,
    Evaluation = 5,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
