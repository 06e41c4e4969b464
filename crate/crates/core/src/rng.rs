use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded, stream-indexed random source.
///
/// `(seed, stream)` fixes the draw sequence on every platform; distinct
/// streams of the same seed are independent ChaCha keystreams.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream: u32,
    inner: ChaCha8Rng,
    bits: u64,
    n_bits: u32,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u32) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(u64::from(stream));
        Self {
            seed,
            stream,
            inner,
            bits: 0,
            n_bits: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u32 {
        self.stream
    }

    /// A fair ±1 step, consuming one bit of the keystream.
    pub fn fair_step(&mut self) -> i64 {
        if self.n_bits == 0 {
            self.bits = self.inner.next_u64();
            self.n_bits = 64;
        }
        let bit = self.bits & 1;
        self.bits >>= 1;
        self.n_bits -= 1;
        if bit == 1 {
            1
        } else {
            -1
        }
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// True with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
