//! Execution helpers that switch between rayon and sequential iteration
//! based on the `parallel` feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Run `f` on a dedicated worker pool of `workers` threads. `None` (or 0)
/// uses the default pool. Without the `parallel` feature this just calls
/// `f`.
#[cfg(feature = "parallel")]
pub fn with_worker_count<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match workers {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_worker_count<R>(_workers: Option<usize>, f: impl FnOnce() -> R) -> R {
    f()
}

/// Fallible map over a slice, preserving item order. Parallel when the
/// `parallel` feature is on; which error surfaces first is unspecified when
/// several items fail.
#[cfg(feature = "parallel")]
pub(crate) fn try_map_ordered<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn try_map_ordered<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    F: Fn(&T) -> Result<R, E>,
{
    items.iter().map(f).collect()
}
