//! Replica-level parallelism.
//!
//! Work items are independent and indexed; results come back in index order
//! so every downstream reduction is schedule independent. The environment
//! variable `HJLAB_THREADS` caps the number of worker threads.

use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = ThreadPoolBuilder::new();
        if let Some(cap) = std::env::var("HJLAB_THREADS")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&c| c > 0)
        {
            builder = builder.num_threads(cap);
        }
        builder.build().expect("failed to build worker pool")
    })
}

pub fn threads() -> usize {
    pool().current_num_threads()
}

/// Evaluates `f(0..count)` in parallel and returns results in index order.
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    pool().install(|| (0..count).into_par_iter().map(&f).collect())
}

/// Fallible variant of [`map_indexed`]; the first error in index order wins.
pub fn try_map_indexed<T, E, F>(count: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(count, f).into_iter().collect()
}
