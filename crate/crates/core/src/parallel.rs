//! Data-parallel batch execution with a sequential fallback.
//!
//! Batches are indexed `0..n`; each index derives its own RNG stream, and all
//! reductions used with these helpers are associative and commutative, so
//! both execution modes return identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the rayon thread pool when the `parallel` feature is enabled,
    /// otherwise runs sequentially.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

pub(crate) fn map_reduce<T, M, R, I>(exec: Execution, n: usize, map: M, identity: I, reduce: R) -> T
where
    T: Send,
    M: Fn(usize) -> T + Sync + Send,
    I: Fn() -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(map).reduce(identity, reduce),
        _ => (0..n).map(map).fold(identity(), reduce),
    }
}
