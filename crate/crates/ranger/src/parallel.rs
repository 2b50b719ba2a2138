//! Rayon-backed executor for runner campaigns.

use rayon::prelude::*;
use stretch_ranger_core::runner::Executor;

use crate::AppError;

/// Runs cells on a dedicated pool of `jobs` workers. Results come back in
/// index order, and each cell seeds its own stream, so the worker count
/// never changes the output.
pub struct Parallel {
    pool: rayon::ThreadPool,
}

impl Parallel {
    /// `None` uses one worker per available core.
    pub fn new(jobs: Option<usize>) -> Result<Self, AppError> {
        let jobs = match jobs {
            Some(0) => return Err(AppError::Input("--jobs must be at least 1".into())),
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| AppError::Input(format!("thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn jobs(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Parallel {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_index_order() {
        let p = Parallel::new(Some(4)).unwrap();
        assert_eq!(p.jobs(), 4);
        let out = p.map(1000, |i| i * i);
        assert!(out.iter().enumerate().all(|(i, v)| *v == i * i));
    }

    #[test]
    fn zero_jobs_is_an_input_error() {
        assert!(Parallel::new(Some(0)).is_err());
    }
}
