//! Execution strategy for independent restart batches.
//!
//! With the `parallel` feature the batch runs on the ambient rayon pool;
//! reductions stay deterministic because results are collected in index
//! order and reduced sequentially. Without the feature, `Parallel` falls
//! back to the sequential loop.

/// How to run a batch of independent starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel
    }
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub(crate) fn indexed_map<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        Execution::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}
