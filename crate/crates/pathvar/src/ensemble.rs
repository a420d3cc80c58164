//! Deterministic Monte-Carlo ensembles.
//!
//! Every path in an ensemble gets its own RNG stream derived by hashing
//! `(master_seed, path_index)`, so results do not depend on how the work is
//! scheduled across threads.

use rayon::prelude::*;

/// SplitMix64 finalizer; used to derive independent stream seeds.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the `index`-th stream of a master seed.
pub fn stream_seed(master_seed: u64, index: u64) -> u64 {
    mix64(master_seed ^ mix64(index.wrapping_add(1)))
}

/// Runs `job(path_index, path_seed)` for `num_paths` paths, in parallel when a
/// rayon pool is available. Output order is by path index regardless of
/// scheduling.
pub fn run_ensemble<T, F>(num_paths: usize, master_seed: u64, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync,
{
    (0..num_paths)
        .into_par_iter()
        .map(|i| job(i, stream_seed(master_seed, i as u64)))
        .collect()
}

/// Like [`run_ensemble`] but capped at `threads` worker threads. Useful for
/// memory-heavy path lengths.
pub fn run_ensemble_with_threads<T, F>(
    num_paths: usize,
    master_seed: u64,
    threads: usize,
    job: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("failed to build thread pool");
    pool.install(|| run_ensemble(num_paths, master_seed, job))
}

/// Median of a sample; averages the two middle elements for even lengths.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sample mean.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample Pearson correlation.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}
