use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the generator behind stream `stream_id` of master seed `seed`.
pub fn stream_seed(seed: u64, stream_id: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream_id))
}

/// Reproducible random stream identified by `(seed, stream_id)`.
///
/// One stream is owned by one trial. Named substreams split it further so
/// that, for example, the initial state of trial `i` does not depend on how
/// many numbers the direction sampler consumed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self {
            seed,
            stream_id,
            rng: ChaCha8Rng::seed_from_u64(stream_seed(seed, stream_id)),
        }
    }

    /// Independent child stream; keeps the parent's `(seed, stream_id)` labels.
    pub fn substream(&self, tag: u64) -> Self {
        let child = splitmix64(stream_seed(self.seed, self.stream_id) ^ splitmix64(tag ^ 0xA5A5_A5A5_5A5A_5A5A));
        Self {
            seed: self.seed,
            stream_id: self.stream_id,
            rng: ChaCha8Rng::seed_from_u64(child),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
