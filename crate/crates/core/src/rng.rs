//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] built from a
//! root seed and a stream name. Streams with different names never share
//! state, so adding a consumer does not perturb the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a, used only to map stream names to stable 64-bit ids.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Plain generator for a bare integer seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Splits one root seed into independent named streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    root: u64,
}

impl Streams {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Generator for `name`; identical for identical `(root, name)`.
    pub fn stream(&self, name: &str) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(fnv1a(name.as_bytes()));
        rng
    }

    /// Generator for sample `index` of the stream `name`.
    pub fn sample(&self, name: &str, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root ^ fnv1a(name.as_bytes()));
        rng.set_stream(index as u64);
        rng
    }

    /// Derives a plain `u64` seed for `name`, for APIs that take integer seeds.
    pub fn derive_seed(&self, name: &str) -> u64 {
        use rand::RngCore;
        self.stream(name).next_u64()
    }
}

/// Stable hash of a slice of floats, for deriving deterministic seeds from data.
pub fn hash_f64s<'a>(values: impl IntoIterator<Item = &'a f64>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}
