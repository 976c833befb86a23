// Index-ordered parallel map. Results are assembled by index, so output does
// not depend on the number of worker threads.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Run `op` on a pool of `threads` workers; `0` means the global pool.
#[cfg(feature = "parallel")]
pub(crate) fn with_threads<R, F>(threads: usize, op: F) -> crate::Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if threads == 0 {
        return Ok(op());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(op))
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn with_threads<R, F>(_threads: usize, op: F) -> crate::Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    Ok(op())
}
