//! Splittable seed streams.
//!
//! Every Monte Carlo replicate and bootstrap replicate gets its own
//! [`SeedStream`], derived from a master seed by a chain of `child(i)`
//! calls. The derived key seeds a ChaCha generator, so a replicate's
//! draws depend only on its position in the tree, never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream(u64);

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream(mix(seed.wrapping_add(GOLDEN)))
    }

    /// Independent sub-stream number `index`.
    pub fn child(self, index: u64) -> Self {
        SeedStream(mix(self.0 ^ mix(index.wrapping_mul(GOLDEN).wrapping_add(1))))
    }

    pub fn key(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}
