//! Sequential or data-parallel execution of independent work items.
//!
//! With the `parallel` feature disabled, [`Execution::Parallel`] runs the
//! same code sequentially. Results never depend on the execution mode: every
//! parallel reduction here combines exact integers.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

impl Execution {
    /// `Parallel` when the crate was built with rayon support.
    pub fn available() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `items`, preserving order.
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

    /// Splits `0..len` into chunks, folds each with `chunk` and combines the
    /// partial results with `merge`.
    pub fn chunked_reduce<R, C, M>(self, len: usize, chunk: C, merge: M) -> R
    where
        R: Send,
        C: Fn(Range<usize>) -> R + Sync + Send,
        M: Fn(R, R) -> R + Sync + Send,
    {
        #[cfg(not(feature = "parallel"))]
        let _ = merge;
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            let pieces = rayon::current_num_threads().max(1) * 2;
            let step = len.div_ceil(pieces).max(32);
            let starts: Vec<usize> = (0..len).step_by(step).collect();
            return starts
                .into_par_iter()
                .map(|s| chunk(s..(s + step).min(len)))
                .reduce_with(&merge)
                .unwrap_or_else(|| chunk(0..0));
        }
        chunk(0..len)
    }
}
