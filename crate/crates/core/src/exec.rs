//! Data-parallel execution with a sequential fallback.
//!
//! Work is always split into fixed-size chunks whose boundaries depend only
//! on the problem size. Partial results are combined in chunk order, so the
//! output is bitwise identical for any number of worker threads and for the
//! sequential path.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled and falls
    /// back to the sequential path otherwise.
    #[default]
    Parallel,
}

fn chunk_ranges(len: usize, chunk: usize) -> impl Iterator<Item = Range<usize>> + Clone {
    let chunk = chunk.max(1);
    (0..len.div_ceil(chunk)).map(move |c| c * chunk..((c + 1) * chunk).min(len))
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over consecutive index ranges of at most `chunk` elements and
    /// returns the results in range order.
    pub fn map_chunks<T, F>(self, len: usize, chunk: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<usize>) -> T + Sync + Send,
    {
        let ranges: Vec<Range<usize>> = chunk_ranges(len, chunk).collect();
        #[cfg(feature = "parallel")]
        if self.is_parallel() && ranges.len() > 1 {
            return ranges.into_par_iter().map(f).collect();
        }
        ranges.into_iter().map(f).collect()
    }

    /// Element-wise map preserving order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Runs `f(offset, chunk)` on disjoint mutable chunks of `data`.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if self.is_parallel() && data.len() > chunk {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(c, slice)| f(c * chunk, slice));
            return;
        }
        for (c, slice) in data.chunks_mut(chunk).enumerate() {
            f(c * chunk, slice);
        }
    }

    /// Accumulates per-chunk dense buffers of length `width` and sums them in
    /// chunk order.
    pub fn accumulate<F>(self, len: usize, chunk: usize, width: usize, f: F) -> Vec<f64>
    where
        F: Fn(Range<usize>, &mut [f64]) + Sync + Send,
    {
        let parts = self.map_chunks(len, chunk, |r| {
            let mut buf = vec![0.0; width];
            f(r, &mut buf);
            buf
        });
        sum_in_order(parts, width)
    }
}

/// Sums equally sized buffers in the order given.
pub fn sum_in_order(parts: Vec<Vec<f64>>, width: usize) -> Vec<f64> {
    let mut it = parts.into_iter();
    let mut total = it.next().unwrap_or_else(|| vec![0.0; width]);
    for part in it {
        for (t, p) in total.iter_mut().zip(&part) {
            *t += p;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_exactly() {
        let r: Vec<_> = chunk_ranges(10, 4).collect();
        assert_eq!(r, vec![0..4, 4..8, 8..10]);
        assert_eq!(chunk_ranges(0, 4).count(), 0);
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let f = |r: Range<usize>, buf: &mut [f64]| {
            for i in r {
                buf[i % 7] += (i as f64).sqrt().sin();
            }
        };
        let a = Execution::Sequential.accumulate(100_003, 1000, 7, f);
        let b = Execution::Parallel.accumulate(100_003, 1000, 7, f);
        assert_eq!(a, b);
    }

    #[test]
    fn for_each_chunk_mut_sees_offsets() {
        let mut v = vec![0usize; 25];
        Execution::Parallel.for_each_chunk_mut(&mut v, 4, |off, s| {
            for (k, x) in s.iter_mut().enumerate() {
                *x = off + k;
            }
        });
        assert!(v.iter().enumerate().all(|(i, &x)| i == x));
    }
}
