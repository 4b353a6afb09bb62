//! Data-parallel execution with a sequential fallback.
//!
//! Every batch in the crate (solver restarts, scene generation, batch
//! refinement, reaching episodes) goes through [`Exec::map_indexed`]. Results
//! are always returned in index order, so the chosen strategy never changes
//! the output. Without the `parallel` feature, [`Exec::Parallel`] runs
//! sequentially.

/// Execution strategy for index-parallel work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this strategy actually fans out across threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Evaluate `f(0..n)` and collect the results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
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

    /// Map over a slice, preserving order.
    pub fn map_slice<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        self.map_indexed(items.len(), |i| f(&items[i]))
    }
}

/// Run `f` on a dedicated pool capped at `workers` threads (`None` = all cores).
#[cfg(feature = "parallel")]
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool ({e}); using the global pool");
                f()
            }
        },
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<T: Send>(_workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree_and_keep_order() {
        let seq = Exec::Sequential.map_indexed(1000, |i| (i * i) as u64 % 97);
        let par = Exec::Parallel.map_indexed(1000, |i| (i * i) as u64 % 97);
        assert_eq!(seq, par);
        assert_eq!(seq[10], 100 % 97);
    }

    #[test]
    fn worker_cap_does_not_change_results() {
        let a = with_workers(Some(1), || Exec::Parallel.map_indexed(64, |i| i * 3));
        let b = with_workers(None, || Exec::Parallel.map_indexed(64, |i| i * 3));
        assert_eq!(a, b);
    }
}
