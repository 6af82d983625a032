//! A thread-pool implementation of the core job runner.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use ucover_core::tower::Runner;

/// Runs jobs on a dedicated rayon pool; results keep index order.
pub struct RayonRunner {
    pool: ThreadPool,
}

impl RayonRunner {
    /// `threads == 0` lets rayon pick the count.
    pub fn new(threads: usize) -> anyhow::Result<Self> {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(RayonRunner { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Runner for RayonRunner {
    fn run<T: Send, F: Fn(usize) -> T + Sync>(&self, n: usize, f: F) -> Vec<T> {
        self.pool.install(|| (0..n).into_par_iter().map(&f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_order() {
        let r = RayonRunner::new(3).unwrap();
        assert_eq!(r.threads(), 3);
        assert_eq!(r.run(100, |i| i * i), (0..100).map(|i| i * i).collect::<Vec<_>>());
    }
}
