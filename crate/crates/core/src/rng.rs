//! Seeded random streams.
//!
//! Every unit of parallel work (a simulation replication, an envelope
//! replicate) draws from its own ChaCha stream derived from a master seed
//! and the unit's index, so results do not depend on how work is scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Generator type used throughout the crate.
pub type ZarRng = ChaCha20Rng;

/// Generator for sub-stream `stream` of master seed `seed`.
pub fn substream(seed: u64, stream: u64) -> ZarRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw on the open interval (0, 1) on a grid of 2^52 midpoints.
pub fn open_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
