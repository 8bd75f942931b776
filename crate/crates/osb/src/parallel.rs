//! Thread pool sized by `OSB_THREADS` and order-preserving parallel maps.
//! Every result is collected in index order, so output does not depend on
//! the number of threads.

use std::sync::OnceLock;

use osb_core::measure::{bounding_box, count_shard, merge_shards, plan_shards, VolumeEstimate};
use osb_core::{ConvexBody, Result};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

pub const THREADS_VAR: &str = "OSB_THREADS";

/// Shared pool; `OSB_THREADS` caps the worker count, otherwise rayon picks it.
pub fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_VAR)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|n| *n > 0)
            .unwrap_or(0);
        ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    })
}

/// `f(0), ..., f(n - 1)` in parallel, in order; the first error in index order wins.
pub fn par_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    pool().install(|| (0..n).into_par_iter().map(f).collect())
}

/// Same shards and result as [`osb_core::measure::mc_volume`], counted in parallel.
pub fn mc_volume(body: &ConvexBody, n_samples: usize, seed: u64) -> Result<VolumeEstimate> {
    if n_samples == 0 {
        return osb_core::measure::mc_volume(body, 0, seed);
    }
    let bbox = bounding_box(body, seed)?;
    let g = body.gauge_fn();
    let shards = plan_shards(n_samples);
    let counts: Vec<_> = pool().install(|| {
        shards
            .par_iter()
            .map(|s| (*s, count_shard(&bbox, *s, seed, |p| g.value(p) <= 1.0)))
            .collect()
    });
    Ok(merge_shards(&bbox, &counts))
}
