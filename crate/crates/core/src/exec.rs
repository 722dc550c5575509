//! Sequential or data-parallel evaluation of independent work items.
//!
//! With the `parallel` feature (default) `Execution::Parallel` runs on a
//! rayon pool; without it every variant degrades to a sequential loop.
//! Results are always returned in input order, so reductions over them do
//! not depend on the worker count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Execution {
    Sequential,
    /// `workers = 0` means rayon's default (one per core).
    Parallel { workers: usize },
    #[default]
    Auto,
}

impl Execution {
    pub fn from_workers(workers: Option<usize>) -> Self {
        match workers {
            Some(1) => Execution::Sequential,
            Some(w) => Execution::Parallel { workers: w },
            None => Execution::Auto,
        }
    }

    /// Runs `op` with this policy's pool installed, so that
    /// [`Execution::map_installed`] calls inside it reuse one pool.
    pub fn install<R, OP>(&self, op: OP) -> R
    where
        R: Send,
        OP: FnOnce() -> R + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel { workers } => match rayon::ThreadPoolBuilder::new().num_threads(*workers).build() {
                Ok(pool) => pool.install(op),
                Err(_) => op(),
            },
            _ => op(),
        }
    }

    /// Like [`Execution::map_indexed`], but parallel variants run on the
    /// current (installed or global) pool.
    pub fn map_installed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..len).map(f).collect(),
            #[cfg(feature = "parallel")]
            _ => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            _ => (0..len).map(f).collect(),
        }
    }

    /// Maps `f` over `0..len`, preserving order.
    pub fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..len).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel { workers } => {
                use rayon::prelude::*;
                match rayon::ThreadPoolBuilder::new().num_threads(*workers).build() {
                    Ok(pool) => pool.install(|| (0..len).into_par_iter().map(&f).collect()),
                    Err(_) => (0..len).map(f).collect(),
                }
            }
            #[cfg(feature = "parallel")]
            Execution::Auto => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            _ => (0..len).map(f).collect(),
        }
    }
}
