//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs on
//! the rayon global pool. Without it every call runs sequentially, so results
//! never depend on the feature: each helper preserves input order and reduces
//! with an associative operator.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run in parallel.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn map_collect<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub fn flat_map_collect<T, U, F>(exec: Execution, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> Vec<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.into_par_iter().flat_map_iter(f).collect();
    }
    let _ = exec;
    items.into_iter().flat_map(f).collect()
}

/// Range split into this many fixed chunks for reductions.
const REDUCE_CHUNKS: usize = 64;

/// Maps every index and reduces. Chunk boundaries depend only on the range,
/// and chunk results are combined left to right, so float results are
/// bit-identical in both modes and on any number of threads.
pub fn map_reduce_range<U, M, R, Id>(
    exec: Execution,
    range: Range<usize>,
    identity: Id,
    map: M,
    reduce: R,
) -> U
where
    U: Send,
    M: Fn(usize) -> U + Sync + Send,
    R: Fn(U, U) -> U + Sync + Send,
    Id: Fn() -> U + Sync + Send,
{
    let end = range.end;
    let chunk = range.len().div_ceil(REDUCE_CHUNKS).max(1);
    let starts: Vec<usize> = range.step_by(chunk).collect();
    let parts = map_collect(exec, &starts, |&s| {
        (s..(s + chunk).min(end))
            .map(&map)
            .fold(identity(), &reduce)
    });
    parts.into_iter().fold(identity(), &reduce)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map_collect(Execution::Sequential, &items, |x| x * x);
        let par = map_collect(Execution::Parallel, &items, |x| x * x);
        assert_eq!(seq, par);
        let s = map_reduce_range(
            Execution::Sequential,
            0..500,
            || 0u64,
            |i| i as u64,
            |a, b| a + b,
        );
        let p = map_reduce_range(
            Execution::Parallel,
            0..500,
            || 0u64,
            |i| i as u64,
            |a, b| a + b,
        );
        assert_eq!(s, p);
        let e = map_reduce_range(
            Execution::Sequential,
            0..0,
            || 7u64,
            |i| i as u64,
            |a, b| a + b,
        );
        assert_eq!(e, 7);
        let f = flat_map_collect(Execution::Parallel, vec![1, 2, 3], |x| vec![x; x]);
        assert_eq!(f, vec![1, 2, 2, 3, 3, 3]);
    }

    #[test]
    fn float_reduction_is_reproducible() {
        let map = |i: usize| 1.0 / (1.0 + i as f64).sqrt();
        let seq = map_reduce_range(Execution::Sequential, 3..100_003, || 0.0, map, |a, b| a + b);
        for _ in 0..8 {
            let par = map_reduce_range(Execution::Parallel, 3..100_003, || 0.0, map, |a, b| a + b);
            assert_eq!(seq.to_bits(), par.to_bits());
        }
    }
}
