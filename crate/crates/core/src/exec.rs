//! Execution mode for the data-parallel kernels.
//!
//! Every kernel splits its output into disjoint chunks whose contents do not
//! depend on how chunks are scheduled, so `Sequential` and `Parallel` produce
//! bit-identical results. Without the `parallel` feature, `Parallel` runs
//! sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// True when work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Run `f(chunk_index, chunk)` over consecutive `chunk`-sized pieces.
    pub fn for_each_chunk<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }

    /// Like [`Exec::for_each_chunk`] with per-worker scratch state.
    pub fn for_each_chunk_init<T, S, I, F>(self, data: &mut [T], chunk: usize, init: I, f: F)
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each_init(&init, |s, (i, c)| f(s, i, c));
            return;
        }
        let mut s = init();
        data.chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(&mut s, i, c));
    }

    /// Ordered map over `0..n`.
    pub fn map_indices<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

/// Transpose each of `outer` consecutive `rows x cols` blocks of `src` into
/// `cols x rows` blocks of `dst`.
pub(crate) fn transpose_blocks<T: Copy + Send + Sync>(
    exec: Exec,
    src: &[T],
    dst: &mut [T],
    rows: usize,
    cols: usize,
) {
    debug_assert_eq!(src.len(), dst.len());
    let block = rows * cols;
    exec.for_each_chunk(dst, rows, |c, out| {
        let o = c / cols;
        let j = c % cols;
        let base = o * block;
        for (i, v) in out.iter_mut().enumerate() {
            *v = src[base + i * cols + j];
        }
    });
}
