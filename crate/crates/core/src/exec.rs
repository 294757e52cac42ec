//! Data-parallel execution with a sequential fallback.
//!
//! Every parallel loop in the crate is expressed as an ordered map over
//! index blocks. Results come back in block order and are reduced by the
//! caller in that order, so the floating-point output does not depend on
//! the number of worker threads. Without the `parallel` feature,
//! [`Execution::Parallel`] runs sequentially.

use std::ops::Range;

/// Default block length for partitioned loops.
pub const BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Splits `0..len` into blocks of `block` indices and maps `f` over them,
    /// returning the per-block results in block order.
    pub fn map_blocks<T, F>(self, len: usize, block: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<usize>) -> T + Sync + Send,
    {
        let block = block.max(1);
        let n_blocks = len.div_ceil(block);
        let range = move |b: usize| b * block..((b + 1) * block).min(len);
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n_blocks).into_par_iter().map(|b| f(range(b))).collect()
            }
            _ => (0..n_blocks).map(|b| f(range(b))).collect(),
        }
    }

    /// Ordered map over individual items.
    pub fn map<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }
}
