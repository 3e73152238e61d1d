//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the helpers dispatch to rayon
//! unless parallelism has been switched off at runtime with
//! [`set_enabled`]. Without the feature everything runs sequentially. The
//! results are identical either way; only wall time differs.

use std::sync::atomic::{AtomicBool, Ordering};

static ENABLED: AtomicBool = AtomicBool::new(true);

/// Turns the rayon paths on or off for the whole process.
pub fn set_enabled(on: bool) {
    ENABLED.store(on, Ordering::Relaxed);
}

/// Whether the helpers currently run in parallel.
pub fn enabled() -> bool {
    cfg!(feature = "parallel") && ENABLED.load(Ordering::Relaxed)
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if enabled() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Below this many scalar operations a parallel pass costs more than it saves.
pub const MIN_PARALLEL_WORK: usize = 1 << 16;

/// Applies `f` to every element in place.
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    for_each_mut_sized(items, usize::MAX, f)
}

/// [`for_each_mut`] that stays sequential when `work` is below
/// [`MIN_PARALLEL_WORK`].
pub fn for_each_mut_sized<T, F>(items: &mut [T], work: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if enabled() && work >= MIN_PARALLEL_WORK {
        use rayon::prelude::*;
        items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = work;
    items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}
