//! Deterministic seeding for parallel Monte-Carlo loops.
//!
//! Every stochastic routine that runs in parallel splits its work into
//! fixed-size chunks; chunk `c` draws from a generator seeded with
//! `derive_seed(master, c)`. Chunk boundaries never depend on the number of
//! worker threads, and partial results are combined in chunk order, so a run
//! on one thread reproduces a run on many threads bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The generator used throughout the crate.
pub type SeededRng = ChaCha8Rng;

/// Number of draws handled by one parallel task.
pub const CHUNK_SIZE: u64 = 4096;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a task index into a master seed (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `task(chunk_index, draws_in_chunk, rng)` over `total` draws split into
/// [`CHUNK_SIZE`] chunks and returns the per-chunk results in chunk order.
pub(crate) fn chunked<T, F>(total: u64, seed: u64, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64, &mut SeededRng) -> T + Sync,
{
    let chunks = total.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_SIZE;
            let len = CHUNK_SIZE.min(total - start);
            let mut rng = rng_from_seed(derive_seed(seed, c));
            task(c, len, &mut rng)
        })
        .collect()
}

/// Running first and second moments, merged in a fixed order.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Standard error of the mean, using the unbiased variance.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, 0));
    }

    #[test]
    fn chunk_lengths_cover_total() {
        let lens = chunked(10_000, 1, |_, len, _| len);
        assert_eq!(lens, vec![4096, 4096, 1808]);
    }

    #[test]
    fn constant_stream_has_zero_stderr() {
        let mut m = Moments::default();
        for _ in 0..10 {
            m.push(0.25);
        }
        assert_eq!(m.mean(), 0.25);
        assert_eq!(m.stderr(), 0.0);
    }
}
