use infofit_core::exec::Executor;
use rayon::prelude::*;

/// Executor backed by a dedicated rayon pool. Results come back in input
/// order whatever the worker count.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
        Ok(Self { pool })
    }
}

impl Executor for RayonExecutor {
    fn map<T, R, F>(&self, jobs: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        self.pool.install(|| jobs.into_par_iter().map(f).collect())
    }
}
