//! Executor abstraction: the core stays single-threaded, callers plug in a
//! worker pool. Results are always returned in index order so that output does
//! not depend on scheduling.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluate `f(0), …, f(n-1)` and return the results in index order.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Plain in-order loop.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
