//! Execution mode for the data-parallel loops (element integration,
//! quadrature post-processing, independent right-hand sides).
//!
//! With the `parallel` feature disabled every mode runs sequentially.
//! [`ExecMode::Sequential`] is always available and gives bit-identical
//! results from run to run; the parallel mode is deterministic only up to
//! floating-point summation order in reductions.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    #[default]
    Parallel,
    Sequential,
}

impl ExecMode {
    pub fn deterministic(flag: bool) -> Self {
        if flag {
            ExecMode::Sequential
        } else {
            ExecMode::Parallel
        }
    }

    #[inline]
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// `(0..n).map(f).collect()`, order preserving.
pub fn map_indexed<R, F>(mode: ExecMode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Map each index to a partial value and fold the partials together.
pub fn reduce_indexed<R, F, C>(mode: ExecMode, n: usize, identity: R, f: F, combine: C) -> R
where
    R: Send + Sync + Clone,
    F: Fn(usize) -> R + Sync + Send,
    C: Fn(R, R) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n)
            .into_par_iter()
            .map(&f)
            .reduce(|| identity.clone(), &combine);
    }
    let _ = mode;
    (0..n).map(f).fold(identity, combine)
}

/// Apply `f` to each item of a mutable slice.
pub fn for_each_mut<T, F>(mode: ExecMode, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        items.par_iter_mut().enumerate().for_each(|(i, t)| f(i, t));
        return;
    }
    let _ = mode;
    items.iter_mut().enumerate().for_each(|(i, t)| f(i, t));
}
