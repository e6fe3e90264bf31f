//! Sequential or data-parallel execution of independent work items.
//!
//! Without the `parallel` feature, `Parallel` runs sequentially. Results
//! are always returned in input order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether work actually runs on the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Order-preserving map over `0..n`.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

/// Sets up the rayon pool from a thread cap and returns the matching
/// execution mode. Dense factorizations and eigensolves are always
/// sequential, so results do not depend on the thread count.
pub fn configure_threads(threads: Option<usize>) -> Execution {
    match threads {
        Some(1) => Execution::Sequential,
        #[cfg(feature = "parallel")]
        Some(n) => {
            // a pool may already exist (tests, embedding); keep it then
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Execution::Parallel
        }
        #[cfg(feature = "parallel")]
        None => Execution::Parallel,
        #[cfg(not(feature = "parallel"))]
        _ => Execution::Sequential,
    }
}
