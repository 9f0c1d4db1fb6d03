//! Row-level data parallelism with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon; without it they
//! run the same closures on plain iterators. Reductions are always combined
//! row by row in index order, so both builds produce bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f(row_index, row)` to every `row_len`-sized chunk of `data`.
pub fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len).enumerate().for_each(|(i, row)| f(i, row));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(row_len).enumerate().for_each(|(i, row)| f(i, row));
}

/// Evaluates `f` on `0..n`, returning results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Per-row partial results of `f(row_index, row)`, in row order.
pub fn map_rows<T, R, F>(data: &[T], row_len: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks(row_len).enumerate().map(|(i, row)| f(i, row)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks(row_len).enumerate().map(|(i, row)| f(i, row)).collect()
    }
}

/// Deterministic sum: rows reduced independently, partials added in order.
pub fn sum_rows<T, F>(data: &[T], row_len: usize, f: F) -> f64
where
    T: Sync,
    F: Fn(usize, &[T]) -> f64 + Send + Sync,
{
    map_rows(data, row_len, f).into_iter().sum()
}

/// Whether this build was compiled with rayon support.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
