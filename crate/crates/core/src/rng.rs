//! Seeded, splittable random streams.
//!
//! A stream is identified by `(seed, stream_id)`. The same pair always
//! reproduces the same draw sequence; distinct stream ids select
//! non-overlapping ChaCha keystreams under the same key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

/// SplitMix64 finalizer.
fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Deterministically derive the `index`-th child stream.
    pub fn child(&self, index: u64) -> Self {
        let id = mix64(self.stream_id ^ mix64(index.wrapping_add(0xA076_1D64_78BD_642F)));
        Self {
            seed: self.seed,
            stream_id: id,
        }
    }

    /// Per-replica stream used by every Monte Carlo loop.
    pub fn replica(&self, r: usize) -> Self {
        self.child(r as u64)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}
