//! Deterministic parallel-map capability.
//!
//! One pool is created at the entry point (CLI or test harness) and handed
//! down; library modules never spawn threads of their own. `map_indexed`
//! and `map_range` return results in input order, so a sequential reduction
//! over the output is bit-identical at any thread count.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Shared worker pool; cheap to clone.
#[derive(Clone)]
pub struct Workers {
    pool: Arc<rayon::ThreadPool>,
}

impl std::fmt::Debug for Workers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workers")
            .field("threads", &self.threads())
            .finish()
    }
}

impl Workers {
    /// Pool with a fixed thread count; `threads` must be ≥ 1.
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(Error::OutOfRange("thread count must be >= 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::SolverFailure(format!("thread pool: {e}")))?;
        Ok(Workers { pool: Arc::new(pool) })
    }

    /// Single-threaded pool, the library-test default.
    pub fn serial() -> Self {
        Workers::new(1).expect("single-thread pool always builds")
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Parallel map preserving input order.
    pub fn map_indexed<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        self.pool
            .install(|| items.par_iter().enumerate().map(|(i, item)| f(i, item)).collect())
    }

    /// Parallel map over indices 0..count, preserving order.
    pub fn map_range<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        self.pool
            .install(|| (0..count).into_par_iter().map(f).collect())
    }
}
