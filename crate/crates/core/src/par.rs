//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper here preserves element order, so results are bit-identical
//! whether or not the `parallel` feature is enabled. Reductions are never
//! parallelised for the same reason.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to consecutive chunks of `width` elements, passing each call a
/// scratch buffer produced by `init`.
pub(crate) fn for_each_chunk_with<T, S, I, F>(data: &mut [T], width: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(width).for_each_init(init, f);
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = init();
        for chunk in data.chunks_mut(width) {
            f(&mut scratch, chunk);
        }
    }
}

/// Fills `out[i] = f(i)`.
pub(crate) fn fill_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
    #[cfg(not(feature = "parallel"))]
    for (i, v) in out.iter_mut().enumerate() {
        *v = f(i);
    }
}

/// Order-preserving map over a slice. Used for ensembles and sweeps where each
/// item is an independent, possibly expensive, computation.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
