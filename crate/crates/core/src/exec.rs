//! Sequential / rayon execution switch.
//!
//! Every parallel sweep in the crate maps an index range to per-index results
//! and reduces them in index order afterwards, so the two execution modes are
//! bit-for-bit interchangeable.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when the `parallel` feature is off.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Evaluates `f` on `0..n` and returns the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Splits `0..total` into blocks of `block` indices, evaluates `f` on each
    /// block range and returns the block results in order.
    pub fn map_blocks<T, F>(self, total: usize, block: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    {
        let block = block.max(1);
        let n_blocks = total.div_ceil(block);
        self.map(n_blocks, |b| {
            let lo = b * block;
            f(lo..(lo + block).min(total))
        })
    }
}
