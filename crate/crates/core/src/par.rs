//! Switch between rayon-backed and sequential inner loops.
//!
//! Every parallel routine in the crate takes an [`Execution`] and produces
//! the same result under either variant. Without the `parallel` feature,
//! `Execution::Parallel` runs sequentially.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
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

const MIN_ROWS_PER_TASK: usize = 16;

/// Applies `f` to each `chunk`-sized row of `data`, with its row index.
pub fn for_each_row<T, F>(exec: Execution, data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    if chunk == 0 {
        return;
    }
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            // small rows are not worth a task each
            data.par_chunks_mut(chunk)
                .with_min_len(MIN_ROWS_PER_TASK)
                .enumerate()
                .for_each(|(i, row)| f(i, row));
        }
        _ => data
            .chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, row)| f(i, row)),
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Runs two closures, potentially in parallel.
pub fn join<A, B, RA, RB>(exec: Execution, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => rayon::join(a, b),
        _ => (a(), b()),
    }
}
