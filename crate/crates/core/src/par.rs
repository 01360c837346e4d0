//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature the work runs on rayon; without it, or when
//! [`Parallelism::Sequential`] is requested, it runs on the calling thread.
//! Results are always returned in index order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    /// Use `workers` threads, or rayon's default when `None`.
    #[default]
    Parallel,
}

/// `f(0), ..., f(n - 1)`, possibly concurrently.
pub fn map<T, F>(n: usize, parallelism: Parallelism, workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match parallelism {
        Parallelism::Sequential => (0..n).map(f).collect(),
        Parallelism::Parallel => parallel_map(n, workers, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let run = || (0..n).into_par_iter().map(&f).collect();
    match workers {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                log::warn!("could not build a {k}-thread pool ({e}); using the global pool");
                run()
            }
        },
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, _workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Whether the crate was built with a parallel backend.
pub const fn is_parallel_build() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map(100, Parallelism::Sequential, None, |i| i * i);
        let par = map(100, Parallelism::Parallel, Some(2), |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }
}
