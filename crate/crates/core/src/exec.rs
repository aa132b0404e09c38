//! Deterministic element-wise execution.
//!
//! Edge scoring and each propagation phase reduce to "fill `out[i] = f(i)`
//! for every index" with `f` pure, so any executor that partitions the index
//! range produces bit-identical results. The serial executor lives here; a
//! thread-pool implementation lives in the std companion crate.

/// Fills an output slice from a pure per-index function.
pub trait ParallelMap: Sync {
    fn map_into(&self, out: &mut [f64], f: &(dyn Fn(usize) -> f64 + Sync));
}

/// Single-threaded executor; the reference behavior.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl ParallelMap for Serial {
    fn map_into(&self, out: &mut [f64], f: &(dyn Fn(usize) -> f64 + Sync)) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
    }
}
