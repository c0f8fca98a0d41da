use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::RngStream;

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|mean − target| ≤ max(rel·|target|, k·SE)`.
    pub fn within(&self, target: f64, rel: f64, k_se: f64) -> bool {
        (self.mean - target).abs() <= (rel * target.abs()).max(k_se * self.std_error)
    }

    /// Estimate from i.i.d. samples (per-sample variance).
    pub fn from_samples(xs: &[f64]) -> Self {
        let mut acc = BatchMeans::new(1);
        xs.iter().for_each(|&x| acc.push(x));
        Estimate::combine(&[acc])
    }

    /// Pools batch accumulators in the given order.
    ///
    /// The mean uses every sample; the standard error uses the spread of the
    /// full batch means, which stays honest for serially correlated series
    /// as long as batches are longer than the correlation time.
    pub fn combine(parts: &[BatchMeans]) -> Self {
        let total: Vec<f64> = parts.iter().map(|p| p.total).collect();
        let count: usize = parts.iter().map(|p| p.count).sum();
        if count == 0 {
            return Estimate { mean: f64::NAN, std_error: f64::NAN };
        }
        let mean = pairwise_sum(&total) / count as f64;
        let batch_means: Vec<f64> = parts.iter().flat_map(|p| p.means.iter().copied()).collect();
        let k = batch_means.len();
        let std_error = if k < 2 {
            f64::NAN
        } else {
            let bm = pairwise_sum(&batch_means) / k as f64;
            let dev: Vec<f64> = batch_means.iter().map(|m| (m - bm) * (m - bm)).collect();
            (pairwise_sum(&dev) / ((k - 1) * k) as f64).sqrt()
        };
        Estimate { mean, std_error }
    }
}

/// Streaming accumulator of sums and fixed-length batch means.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    batch_len: usize,
    total: f64,
    count: usize,
    cur: f64,
    cur_len: usize,
    means: Vec<f64>,
}

impl BatchMeans {
    pub fn new(batch_len: usize) -> Self {
        Self { batch_len: batch_len.max(1), total: 0.0, count: 0, cur: 0.0, cur_len: 0, means: Vec::new() }
    }

    /// Batch length for a series of `n` samples: about 32 batches, at most
    /// 1000 samples each.
    pub fn for_len(n: usize) -> Self {
        Self::new((n / 32).clamp(1, 1000))
    }

    pub fn push(&mut self, x: f64) {
        self.total += x;
        self.count += 1;
        self.cur += x;
        self.cur_len += 1;
        if self.cur_len == self.batch_len {
            self.means.push(self.cur / self.batch_len as f64);
            self.cur = 0.0;
            self.cur_len = 0;
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Pairwise (cascade) summation; fixed association order for a given length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Splits `total` work items into shards of at most `per_shard` and runs
/// `f(shard_index, size, stream)` on forked streams in parallel. Results come
/// back in shard order, independent of the thread count.
pub fn run_sharded<T, F>(stream: &RngStream, total: usize, per_shard: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize, RngStream) -> T + Sync,
{
    let shards = total.div_ceil(per_shard.max(1)).max(1);
    let base = total / shards;
    let extra = total % shards;
    (0..shards)
        .into_par_iter()
        .map(|k| f(k, base + usize::from(k < extra), stream.fork(k as u64)))
        .collect()
}
