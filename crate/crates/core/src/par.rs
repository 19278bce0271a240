//! Sequential/parallel execution switch and deterministic reductions.
//!
//! Work is always split into chunks whose boundaries depend only on the
//! problem size, never on the number of worker threads, and partial results
//! are combined in chunk order. That makes the parallel path reproduce the
//! sequential one bit for bit.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for the data-parallel loops of the crate.
///
/// `Parallel` silently degrades to `Sequential` when the crate is built
/// without the `parallel` feature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    #[inline]
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// Caps the global worker pool. A no-op without the `parallel` feature.
///
/// Fails if the global pool was already initialised.
pub fn configure_threads(threads: usize) -> crate::Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| crate::Error::InvalidParameter(e.to_string()))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

/// `(0..n).map(f).collect()`, in index order.
pub fn map_indices<R, F>(par: Parallelism, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if par.is_parallel() {
        #[cfg(feature = "parallel")]
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Calls `f(chunk_index, chunk)` on consecutive `chunk_len`-sized pieces of `data`.
pub fn for_each_chunk_mut<T, F>(par: Parallelism, data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    assert!(chunk_len > 0);
    if par.is_parallel() {
        #[cfg(feature = "parallel")]
        {
            data.par_chunks_mut(chunk_len)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    data.chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Splits `range` into fixed-size chunks, maps each chunk, and returns the
/// per-chunk results in order.
pub fn map_chunks<R, F>(par: Parallelism, range: Range<u64>, chunk_len: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<u64>) -> R + Sync + Send,
{
    assert!(chunk_len > 0);
    let len = range.end.saturating_sub(range.start);
    let chunks = len.div_ceil(chunk_len) as usize;
    map_indices(par, chunks, |i| {
        let lo = range.start + i as u64 * chunk_len;
        let hi = (lo + chunk_len).min(range.end);
        f(lo..hi)
    })
}

/// Compensated (Kahan–Babuška/Neumaier) accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Chunk size used by the deterministic reductions over index ranges.
pub const REDUCTION_CHUNK: u64 = 1 << 16;

/// Compensated sum of `term(n)` over `range`, reproducible across thread counts.
pub fn sum_f64<F>(par: Parallelism, range: Range<u64>, term: F) -> f64
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    map_chunks(par, range, REDUCTION_CHUNK, |r| {
        r.map(&term).collect::<KahanSum>().total()
    })
    .into_iter()
    .collect::<KahanSum>()
    .total()
}

/// Exact integer sum of `term(n)` over `range`.
pub fn sum_i64<F>(par: Parallelism, range: Range<u64>, term: F) -> i64
where
    F: Fn(u64) -> i64 + Sync + Send,
{
    map_chunks(par, range, REDUCTION_CHUNK, |r| r.map(&term).sum::<i64>())
        .into_iter()
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_harmonic_tail() {
        let n = 1_000_000u64;
        let exact: f64 = (1..=n).rev().map(|k| 1.0 / k as f64).sum();
        let k: KahanSum = (1..=n).map(|k| 1.0 / k as f64).collect();
        assert!((k.total() - exact).abs() < 1e-12);
    }

    #[test]
    fn chunked_sums_match_across_modes() {
        let f = |n: u64| 1.0 / (n as f64).sqrt();
        let a = sum_f64(Parallelism::Sequential, 1..300_001, f);
        let b = sum_f64(Parallelism::Parallel, 1..300_001, f);
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(
            sum_i64(Parallelism::Sequential, 0..200_000, |n| (n % 7) as i64 - 3),
            sum_i64(Parallelism::Parallel, 0..200_000, |n| (n % 7) as i64 - 3)
        );
    }

    #[test]
    fn map_chunks_covers_range() {
        let parts = map_chunks(Parallelism::Parallel, 5..17, 5, |r| (r.start, r.end));
        assert_eq!(parts, vec![(5, 10), (10, 15), (15, 17)]);
        assert!(map_chunks(Parallelism::Sequential, 3..3, 4, |r| r).is_empty());
    }
}
