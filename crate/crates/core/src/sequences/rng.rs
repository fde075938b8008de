//! Seeded random streams.
//!
//! Every path is drawn from ChaCha8 keyed by `Seed::value` on stream
//! `Seed::stream_id`. Each family consumes exactly one `u64` per index, so
//! the draw for index `i` (1-based) is the `i`-th word of the stream and does
//! not depend on how many threads or paths were sampled before it.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Key and stream of a reproducible random path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub value: u64,
    pub stream_id: u64,
}

impl Seed {
    pub fn new(value: u64, stream_id: u64) -> Self {
        Self { value, stream_id }
    }

    /// Same key, another stream.
    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }

    /// Generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.value);
        rng.set_stream(self.stream_id);
        rng
    }

    /// The `index`-th `u64` of the stream (0-based), computed by seeking.
    pub fn draw_at(&self, index: u64) -> u64 {
        let mut rng = self.rng();
        rng.set_word_pos(u128::from(index) * 2);
        rng.next_u64()
    }
}

/// Uniform on `[0, 1)` from the top 53 bits.
#[inline]
pub fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * TWO_POW_M53
}

/// Uniform on `(0, 1]` from the top 53 bits.
#[inline]
pub fn unit_open0(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * TWO_POW_M53
}
