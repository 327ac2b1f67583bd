//! Seeded random streams.
//!
//! Every stochastic operation takes a [`SimRng`]. Independent streams for
//! workers, chains and pilot phases are derived from one 64-bit master seed
//! with [`stream`], which selects a distinct ChaCha stream id so the
//! sequences never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for `seed` on stream 0.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator number `stream_id` derived from `seed`.
pub fn stream(seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream ids used by the samplers, kept apart so that e.g. the pilot phase
/// of a chain never shares randomness with the chain itself.
pub mod streams {
    pub const MAIN: u64 = 0;
    pub const PILOT: u64 = 1;
    pub const INIT: u64 = 2;
    pub const CALIBRATION: u64 = 3;
    pub const PREDICTION: u64 = 4;
    pub const FIXTURE: u64 = 5;
    pub const ORACLE: u64 = 6;
    /// Draw `i` of an independent-proposal sampler uses `DRAW_BASE + i`, so
    /// results do not depend on how draws are split across workers.
    pub const DRAW_BASE: u64 = 1 << 32;
    /// Same for the draws of a rejection pilot.
    pub const PILOT_DRAW_BASE: u64 = 1 << 33;
}
