//! Worker pool sized by `FILIPPOV_LAB_THREADS` (0 = sequential).
//!
//! Results are always returned in input order so that reductions over them
//! do not depend on scheduling.

use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::ThreadPool;

pub const THREADS_ENV: &str = "FILIPPOV_LAB_THREADS";

fn pool() -> Option<&'static ThreadPool> {
    static POOL: OnceLock<Option<ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let requested = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok());
        match requested {
            Some(0) => None,
            Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().ok(),
            None => rayon::ThreadPoolBuilder::new().build().ok(),
        }
    })
    .as_ref()
}

/// Maps `f` over `items`, in parallel when a pool is configured.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match pool() {
        Some(p) => p.install(|| items.par_iter().map(&f).collect()),
        None => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn preserves_order() {
        let v: Vec<usize> = (0..1000).collect();
        let out = super::par_map(&v, |x| x * 2);
        assert!(out.iter().enumerate().all(|(i, y)| *y == 2 * i));
    }
}
