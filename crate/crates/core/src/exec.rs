//! Order-preserving map helpers shared by the data-parallel inner loops
//! (SLQ probes, dense Hessian columns, per-checkpoint sweeps).
//!
//! `ordered_map` dispatches to rayon when the `parallel` feature is enabled
//! and runs sequentially otherwise. Both paths return results in input
//! order and every reduction downstream consumes them in that order, so a
//! fixed seed yields bit-identical output regardless of thread count.
//! `ordered_map_seq` is always available for direct comparison (used by the
//! benches and the parallel-equivalence tests).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving input order in the output.
pub fn ordered_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Sequential variant of [`ordered_map`], available under every feature set.
pub fn ordered_map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Map over `0..n` preserving index order.
pub fn ordered_map_indices<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    ordered_map((0..n).collect(), f)
}

/// Sequential variant of [`ordered_map_indices`].
pub fn ordered_map_indices_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
