//! Thin seams between the rayon and sequential execution paths.
//!
//! Every hot loop in the crate funnels through one of these helpers, so the
//! `parallel` feature flips the whole solver between data-parallel and plain
//! sequential execution without touching the numerics.

/// Apply `f` to every contiguous lane of length `lane` in `data`.
/// `init` builds a per-worker scratch value (e.g. an FFT scratch buffer).
#[cfg(feature = "parallel")]
pub(crate) fn for_each_lane_mut<S: Send>(
    data: &mut [f64],
    lane: usize,
    init: impl Fn() -> S + Sync + Send,
    f: impl Fn(&mut S, &mut [f64]) + Sync + Send,
) {
    use rayon::prelude::*;
    data.par_chunks_mut(lane).for_each_init(&init, |s, chunk| f(s, chunk));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_lane_mut<S: Send>(
    data: &mut [f64],
    lane: usize,
    init: impl Fn() -> S + Sync + Send,
    f: impl Fn(&mut S, &mut [f64]) + Sync + Send,
) {
    let mut s = init();
    data.chunks_mut(lane).for_each(|chunk| f(&mut s, chunk));
}

/// Fill `out[i] = f(i)` for all indices.
#[cfg(feature = "parallel")]
pub(crate) fn fill_indexed(out: &mut [f64], f: impl Fn(usize) -> f64 + Sync + Send) {
    use rayon::prelude::*;
    const CHUNK: usize = 2048;
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let base = c * CHUNK;
        for (j, slot) in chunk.iter_mut().enumerate() {
            *slot = f(base + j);
        }
    });
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn fill_indexed(out: &mut [f64], f: impl Fn(usize) -> f64 + Sync + Send) {
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = f(i);
    }
}

/// Map every row index `0..rows` to a partial result, in row order.
/// Used for compensated row-wise reductions; the combine step stays
/// sequential so results do not depend on the thread count.
#[cfg(feature = "parallel")]
pub(crate) fn map_rows(rows: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
    use rayon::prelude::*;
    (0..rows).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_rows(rows: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
    (0..rows).map(f).collect()
}

/// Map every element of `items` in order; used for embarrassingly parallel
/// study cells where each result is a whole struct rather than a number.
#[cfg(feature = "parallel")]
pub(crate) fn map_slice<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(&T) -> U + Sync + Send,
) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_slice<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(&T) -> U + Sync + Send,
) -> Vec<U> {
    items.iter().map(f).collect()
}
