//! Data-parallel helpers. With the `parallel` feature these fan out over the
//! rayon pool; without it they are plain sequential iterators. Results are
//! always collected in index order, so output is independent of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    F: Fn(&S) -> T,
{
    items.iter().map(f).collect()
}

/// Collects per-item results, reporting the lowest-index failure.
pub fn collect_results<T, E>(results: Vec<Result<T, E>>) -> Result<Vec<T>, E> {
    results.into_iter().collect()
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
