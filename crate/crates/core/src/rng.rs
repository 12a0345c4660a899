//! Seeded, counter-based random streams.
//!
//! Each stream is ChaCha20 keyed by the seed with an explicit stream id, so a
//! draw depends only on `(seed, stream, position)`. Normal deviates come from
//! the Box-Muller transform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Stream ids reserved for the different consumers of randomness.
pub mod streams {
    pub const DATA: u64 = 0;
    pub const MIXTURE_LABELS: u64 = 1;
    pub const INIT: u64 = 2;
    pub const KMEANS: u64 = 3;
    pub const SHUFFLE: u64 = 4;

    /// Corruption noise for one (epoch, batch) pair.
    pub fn noise(epoch: usize, batch: usize) -> u64 {
        (1 << 56) | ((epoch as u64) << 24) | batch as u64
    }
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha20Rng,
    spare_normal: Option<f64>,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            spare_normal: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller; the second deviate of each pair is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the log finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Fisher-Yates permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.index(i + 1);
            idx.swap(i, j);
        }
        idx
    }
}
