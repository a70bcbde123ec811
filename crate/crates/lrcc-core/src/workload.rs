//! Work accounting shared by all search oracles.
//!
//! Every enumeration (supports, messages, transform tuples, restriction
//! sweeps) charges an approximate operation count against a single budget
//! before it runs, so exhaustion is reported deterministically instead of
//! silently truncating a search.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Execution strategy for the embarrassingly parallel sweeps. The results
/// are identical either way; only wall-clock time differs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[cfg_attr(feature = "parallel", default)]
    Parallel,
}

/// A work budget (in ballpark field-operation units) plus the execution
/// strategy used for sweeps charged against it.
#[derive(Debug)]
pub struct Workload {
    limit: u64,
    used: AtomicU64,
    pub exec: Execution,
}

pub const DEFAULT_BUDGET: u64 = 2_000_000_000;

impl Workload {
    pub fn new(limit: u64) -> Self {
        Workload { limit, used: AtomicU64::new(0), exec: Execution::default() }
    }

    pub fn unbounded() -> Self {
        Self::new(u64::MAX)
    }

    pub fn sequential(mut self) -> Self {
        self.exec = Execution::Sequential;
        self
    }

    #[cfg(feature = "parallel")]
    pub fn parallel(mut self) -> Self {
        self.exec = Execution::Parallel;
        self
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    /// Charge `ops` units; errors once the running total passes the limit.
    pub fn charge(&self, ops: u64) -> Result<()> {
        let before = self.used.fetch_add(ops, Ordering::Relaxed);
        if before.saturating_add(ops) > self.limit {
            Err(Error::BudgetExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }

    /// True if `ops` more units would still fit. Does not charge.
    pub fn fits(&self, ops: u64) -> bool {
        self.used().saturating_add(ops) <= self.limit
    }
}

impl Default for Workload {
    fn default() -> Self {
        Self::new(DEFAULT_BUDGET)
    }
}

/// Run `f` over `items`, returning the first `Some` in slice order.
/// Parallel execution uses `find_first`, which preserves that order.
pub fn find_first_map<T, R, F>(wl: &Workload, items: &[T], f: F) -> Result<Option<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<Option<R>> + Sync + Send,
{
    match wl.exec {
        Execution::Sequential => {
            for it in items {
                if let Some(r) = f(it)? {
                    return Ok(Some(r));
                }
            }
            Ok(None)
        }
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            let found = items
                .par_iter()
                .map(|it| f(it).transpose())
                .find_first(|r| r.is_some())
                .flatten()
                .transpose()?;
            Ok(found)
        }
    }
}

/// Map `f` over `items`, preserving order, failing fast on errors. Parallel
/// execution works on contiguous chunks so short per-item tasks amortize the
/// scheduling cost.
pub fn map_ordered<T, R, F>(wl: &Workload, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    match wl.exec {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            let chunk = (items.len() / 64).max(16);
            let nested: Result<Vec<Vec<R>>> = items
                .par_chunks(chunk)
                .map(|c| c.iter().map(&f).collect::<Result<Vec<R>>>())
                .collect();
            Ok(nested?.into_iter().flatten().collect())
        }
    }
}

/// Fold `f` over `items` and take the minimum of the `Some` results.
pub fn min_map<T, F>(wl: &Workload, items: &[T], f: F) -> Result<Option<u64>>
where
    T: Sync,
    F: Fn(&T) -> Result<Option<u64>> + Sync + Send,
{
    match wl.exec {
        Execution::Sequential => {
            let mut best: Option<u64> = None;
            for it in items {
                if let Some(v) = f(it)? {
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
            }
            Ok(best)
        }
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items
                .par_iter()
                .map(|it| f(it))
                .try_fold(|| None, |acc: Option<u64>, v| {
                    v.map(|v| match (acc, v) {
                        (None, x) => x,
                        (Some(a), None) => Some(a),
                        (Some(a), Some(b)) => Some(a.min(b)),
                    })
                })
                .try_reduce(
                    || None,
                    |a, b| {
                        Ok(match (a, b) {
                            (None, x) | (x, None) => x,
                            (Some(a), Some(b)) => Some(a.min(b)),
                        })
                    },
                )
        }
    }
}
