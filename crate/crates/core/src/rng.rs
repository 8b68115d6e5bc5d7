//! Splittable random streams.
//!
//! Every random draw in a run is tied to `(master seed, replicate, factor id)`.
//! Streams never depend on scheduling, so replicates can be sampled in any
//! order or in parallel and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub master: u64,
    pub replicate: u64,
    pub factor: u64,
}

/// Key-space tags so that different kinds of draws never alias.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Factor = 1,
    Haar = 2,
    Model = 3,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl StreamId {
    pub fn new(master: u64, replicate: u64, factor: u64) -> Self {
        Self {
            master,
            replicate,
            factor,
        }
    }

    /// Builds the ChaCha key from the four lanes. Each lane is mixed separately
    /// so the map from ids to keys stays injective.
    pub fn rng(&self, domain: Domain) -> ChaCha20Rng {
        let lanes = [
            splitmix(self.master),
            splitmix(self.replicate ^ 0x5555_5555_5555_5555),
            splitmix(self.factor ^ 0xaaaa_aaaa_aaaa_aaaa),
            splitmix(domain as u64),
        ];
        let mut seed = [0u8; 32];
        for (chunk, lane) in seed.chunks_exact_mut(8).zip(lanes) {
            chunk.copy_from_slice(&lane.to_le_bytes());
        }
        ChaCha20Rng::from_seed(seed)
    }
}
