//! Deterministic RNG substreams.
//!
//! All randomness in the crate flows from a single 64-bit seed through named
//! substreams. A [`SeedStream`] is a value that can derive child streams by
//! tag; two children with different tag paths are statistically independent,
//! and the same path always yields the same stream. This is what makes batch
//! execution reproducible regardless of worker count or scheduling: each
//! (circuit, shot-block) unit derives its own stream from its indices, never
//! from shared mutable state.

use rand::SeedableRng;

/// The concrete RNG used throughout the crate.
pub type Rng = rand_chacha::ChaCha12Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A point in the seed-derivation tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStream {
    state: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream {
            state: splitmix64(seed),
        }
    }

    /// Child stream for an integer tag (e.g. a circuit index).
    #[must_use]
    pub fn child(&self, tag: u64) -> Self {
        SeedStream {
            state: splitmix64(self.state ^ splitmix64(tag)),
        }
    }

    /// Child stream for a string tag (e.g. a pipeline stage name).
    #[must_use]
    pub fn child_named(&self, tag: &str) -> Self {
        // FNV-1a over the tag bytes keeps the derivation platform-stable.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in tag.as_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.child(h)
    }

    /// Instantiate the RNG for this stream.
    pub fn rng(&self) -> Rng {
        let mut seed = [0u8; 32];
        let mut s = self.state;
        for chunk in seed.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        Rng::from_seed(seed)
    }
}
