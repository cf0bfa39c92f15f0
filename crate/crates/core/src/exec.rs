//! Pluggable execution of independent jobs.

use alloc::vec::Vec;

/// Maps a function over independent jobs. Implementations may run jobs in
/// any order or in parallel but must return results in input order.
pub trait Executor {
    fn map<T, R, F>(&self, jobs: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, jobs: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        jobs.into_iter().map(f).collect()
    }
}
