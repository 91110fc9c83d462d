//! Labelled random streams.
//!
//! Every source of randomness in a run (the adversary, each Backoff station,
//! selector generation) draws from its own stream. A stream is ChaCha8 keyed
//! with `SHA-256(seed as little-endian u64 || label bytes)`, so the sequence
//! depends only on `(seed, label)` and is stable across platforms.

use rand::{Error, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct RandomStream {
    label: String,
    inner: ChaCha8Rng,
}

pub fn derive_stream(seed: u64, label: &str) -> RandomStream {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    RandomStream { label: label.to_owned(), inner: ChaCha8Rng::from_seed(key) }
}

impl RandomStream {
    pub fn label(&self) -> &str {
        &self.label
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), Error> {
        self.inner.try_fill_bytes(dest)
    }
}
