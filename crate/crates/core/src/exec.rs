//! Chunked map over an index range, parallel when the `parallel` feature is
//! on and more than one worker is requested. Results always come back in
//! chunk order, so merged output does not depend on the worker count.

/// Applies `f` to `0..count` and returns the results in index order.
pub fn map_indexed<T, F>(jobs: usize, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if jobs > 1 && count > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        return pool.install(|| (0..count).into_par_iter().map(&f).collect());
    }
    let _ = jobs;
    (0..count).map(f).collect()
}

/// Worker count used when none is given.
pub fn default_jobs() -> usize {
    if cfg!(feature = "parallel") {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        1
    }
}
