//! Deterministic data-parallel helpers.
//!
//! Work is split into chunks of [`CHUNK`] indices. Each chunk is reduced
//! sequentially and the chunk partials are combined left to right, so the
//! floating-point result depends only on the input length, never on the
//! thread count or on whether the `parallel` feature is enabled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const CHUNK: usize = 256;

/// Below this many chunks the rayon overhead dominates.
const PAR_MIN_CHUNKS: usize = 4;

/// `Σ_{i<n} f(i)` with fixed chunking.
pub fn sum(n: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let chunks = n.div_ceil(CHUNK);
    let chunk_sum = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    };
    map(chunks, chunk_sum).into_iter().sum()
}

/// Vector-valued version of [`sum`]; every `f(i)` must have length `dim`.
pub fn sum_vec(n: usize, dim: usize, f: impl Fn(usize, &mut [f64]) + Sync) -> Vec<f64> {
    let chunks = n.div_ceil(CHUNK);
    let chunk_sum = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut acc = vec![0.0; dim];
        let mut buf = vec![0.0; dim];
        for i in lo..hi {
            buf.iter_mut().for_each(|b| *b = 0.0);
            f(i, &mut buf);
            acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
        }
        acc
    };
    let partials = map(chunks, chunk_sum);
    let mut total = vec![0.0; dim];
    for p in partials {
        total.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
    }
    total
}

/// `(0..n).map(f).collect()`, in parallel when enabled and worthwhile.
pub fn map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_MIN_CHUNKS {
            return (0..n).into_par_iter().map(&f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Maps over a slice, preserving order.
pub fn map_slice<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    map(items.len(), |i| f(&items[i]))
}

/// Runs `op` with all helpers in this module forced onto the calling thread.
///
/// Used by the benches to compare against the parallel path in one binary.
pub fn sequential<R: Send>(op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool");
        pool.install(op)
    }
    #[cfg(not(feature = "parallel"))]
    {
        op()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_is_thread_independent() {
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + i as f64);
        let a = sum(10_000, f);
        let b = sequential(|| sum(10_000, f));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn sum_vec_matches_scalar() {
        let v = sum_vec(1000, 2, |i, out| {
            out[0] = i as f64;
            out[1] = 1.0;
        });
        assert_eq!(v, vec![499_500.0, 1000.0]);
        assert_eq!(sum(0, |_| 1.0), 0.0);
    }
}
