//! Deterministic data-parallel helpers.
//!
//! Ensemble work is split into fixed-size chunks; chunk results are combined
//! in chunk order, so floating-point sums do not depend on the worker count.
//! With the `parallel` feature disabled everything runs sequentially through
//! the same chunked code path.

/// Chunk size for path-ensemble reductions. Fixed so that the summation
/// order is part of the numerical contract.
pub const CHUNK: usize = 1024;

#[cfg(feature = "parallel")]
pub fn map_chunks<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync,
{
    use rayon::prelude::*;
    items
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| f(ci * CHUNK, chunk))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_chunks<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(usize, &[T]) -> R,
{
    items
        .chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| f(ci * CHUNK, chunk))
        .collect()
}

/// Apply `f` to every element of `items` in place, in parallel when enabled.
#[cfg(feature = "parallel")]
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    use rayon::prelude::*;
    items
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, item)| f(i, item));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    F: Fn(usize, &mut T),
{
    for (i, item) in items.iter_mut().enumerate() {
        f(i, item);
    }
}

/// Sum chunked partial results in chunk order.
pub fn sum_chunked<T: Sync, F: Fn(usize, &[T]) -> f64 + Sync>(items: &[T], f: F) -> f64 {
    map_chunks(items, f).into_iter().sum()
}

/// Configure the global worker pool. A count of 0 leaves the default.
/// Returns an error if the pool was already initialized with a different
/// size (rayon permits a single global build).
#[cfg(feature = "parallel")]
pub fn configure_threads(count: usize) -> Result<(), String> {
    if count == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(count)
        .build_global()
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_count: usize) -> Result<(), String> {
    Ok(())
}
