//! Seeded random streams. Every (master seed, trial, purpose) triple maps to
//! its own ChaCha stream, so trials can run on any worker in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// What a stream is used for. Each purpose gets a disjoint stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Bits = 0,
    Noise = 1,
    Fading = 2,
    Powers = 3,
    Misc = 4,
}

/// Stream for `trial` and `purpose` under `master`.
pub fn stream(master: u64, trial: u64, purpose: Purpose) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream((trial << 3) | purpose as u64);
    rng
}
