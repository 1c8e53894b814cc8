//! Execution strategy for data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`Exec::map`], which returns results in
//! index order. Reductions are then done sequentially over that ordered vector, so the
//! output never depends on the number of worker threads.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    /// Runs on the rayon global pool when the `parallel` feature is enabled; otherwise
    /// identical to `Sequential`.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// How many restarts are evaluated together by [`Exec::find_first`] in parallel mode.
const RESTART_BATCH: usize = 8;

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `(0..n).map(f).collect()`, possibly in parallel, always in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Las Vegas driver: evaluates `attempt(0), attempt(1), ...` and returns the success
    /// with the lowest index. In parallel mode attempts run in fixed-size batches, so
    /// the selected index is the same as in a sequential scan. If every attempt fails,
    /// all failures are returned in index order.
    pub fn find_first<T, E, F>(self, max_attempts: usize, attempt: F) -> Result<(usize, T), Vec<E>>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        let batch = if self.is_parallel() { RESTART_BATCH } else { 1 };
        let mut failures = Vec::new();
        let mut start = 0;
        while start < max_attempts {
            let len = batch.min(max_attempts - start);
            let results = self.map(len, |i| attempt(start + i));
            for (i, r) in results.into_iter().enumerate() {
                match r {
                    Ok(v) => return Ok((start + i, v)),
                    Err(e) => failures.push(e),
                }
            }
            start += len;
        }
        Err(failures)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            assert_eq!(exec.map(100, |i| i * i), (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn find_first_picks_lowest_index() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let r = exec.find_first(50, |i| if i % 7 == 5 { Ok(i) } else { Err(i) });
            assert_eq!(r.unwrap(), (5, 5));
            let all = exec.find_first::<(), usize, _>(10, Err);
            assert_eq!(all.unwrap_err(), (0..10).collect::<Vec<_>>());
        }
    }
}
