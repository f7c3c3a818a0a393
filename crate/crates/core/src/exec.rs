//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the items are spread over a rayon pool of the
//! requested size; without it, or with `workers == 1`, they run in sequence.
//! Either way the output order matches the input order.

use crate::error::Result;

/// Maps `f` over `items`, returning results in input order.
///
/// `workers == 0` lets rayon pick the thread count.
#[cfg(feature = "parallel")]
pub fn ordered_map<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    if workers == 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::Error::Numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(not(feature = "parallel"))]
pub fn ordered_map<T, R, F>(items: &[T], _workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    Ok(items.iter().map(f).collect())
}
