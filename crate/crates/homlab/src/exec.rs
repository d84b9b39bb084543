//! Sequential or rayon-backed execution of pure per-item maps.
//!
//! Table construction and per-pair reconstruction are pure maps over
//! precomputed key lists. With the `parallel` feature the maps run on the
//! current rayon pool; results are collected in input order either way, so
//! output is deterministic and independent of thread count.

#[cfg(feature = "parallel")]
pub(crate) fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
