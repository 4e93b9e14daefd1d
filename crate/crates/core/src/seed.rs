//! Reproducible seeding with independent per-trial substreams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Master seed from which trial substreams are derived.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Seed of substream `index`.
    pub fn substream(self, index: u64) -> u64 {
        mix64(self.0 ^ GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1)))
    }

    /// Generator for substream `index`.
    pub fn rng(self, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.substream(index))
    }

    /// A new master seed for an independent family of substreams, used when
    /// one experiment runs several cells that each index trials from zero.
    pub fn derive(self, cell: u64) -> Seed {
        Seed(mix64(self.substream(cell) ^ 0xD1B5_4A32_D192_ED03))
    }
}
