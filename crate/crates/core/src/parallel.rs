//! Thread-pool scoping for ensemble work.
//!
//! Experiments parallelize with rayon over independent units (particle
//! blocks, realizations), each carrying its own derived random stream, and
//! reduce the results in index order. Output therefore does not depend on the
//! number of worker threads.

/// Runs `f` inside a rayon pool of `threads` workers (0 = all available cores).
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction");
    pool.install(f)
}

/// Number of worker threads used when the caller asks for the default.
pub fn default_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
