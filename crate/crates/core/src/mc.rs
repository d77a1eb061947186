//! Seeded, order-independent Monte Carlo averaging.
//!
//! Sample `i` draws from its own ChaCha stream `(seed, i)`, so results do not
//! depend on thread count. Samples are accumulated in fixed chunks which are
//! reduced in chunk order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const CHUNK: usize = 1024;

/// The generator for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Running sums for a vector-valued estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Self {
            n: 0,
            sum: vec![0.0; dim],
            sum_sq: vec![0.0; dim],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.n += 1;
        for ((s, q), v) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(x) {
            *s += v;
            *q += v * v;
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.sum.iter().map(|s| s / n).collect()
    }

    /// Standard error of the mean, from the unbiased sample variance.
    pub fn stderr(&self) -> Vec<f64> {
        if self.n < 2 {
            return vec![f64::INFINITY; self.sum.len()];
        }
        let n = self.n as f64;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, q)| {
                let var = ((q - s * s / n) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            })
            .collect()
    }
}

/// Average `sample(rng, out)` over `samples` independent draws. `out` has
/// length `dim` and is zeroed before each call.
pub fn monte_carlo<F>(seed: u64, samples: usize, dim: usize, sample: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut m = Moments::new(dim);
            let mut out = vec![0.0; dim];
            let end = ((chunk + 1) * CHUNK).min(samples);
            for i in chunk * CHUNK..end {
                let mut rng = sample_rng(seed, i as u64);
                out.iter_mut().for_each(|x| *x = 0.0);
                sample(&mut rng, &mut out);
                m.push(&out);
            }
            m
        })
        .collect();
    partial.iter().fold(Moments::new(dim), |mut acc, m| {
        acc.merge(m);
        acc
    })
}
