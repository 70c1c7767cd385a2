//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon;
//! a runtime switch ([`set_sequential`]) forces the sequential path so the
//! two can be compared in one process (see `benches/par_vs_seq.rs`).
//! Without the feature the crate has no rayon dependency at all.
//!
//! Every helper preserves item order, and all callers reduce the collected
//! results sequentially, so parallel and sequential runs are bit-identical.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force the sequential path even when compiled with the `parallel` feature.
pub fn set_sequential(yes: bool) {
    FORCE_SEQUENTIAL.store(yes, Ordering::SeqCst);
}

pub fn is_sequential() -> bool {
    if cfg!(not(feature = "parallel")) {
        return true;
    }
    FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

/// `(0..n).map(f)` collected in index order.
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !is_sequential() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(&f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Mutate equal-length chunks of `data` in place; `f` receives the chunk index.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    assert!(chunk > 0);
    #[cfg(feature = "parallel")]
    {
        if !is_sequential() {
            use rayon::prelude::*;
            data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
            return;
        }
    }
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

/// Thread-budget hint from the CLI: 0 = library default, 1 = sequential,
/// n > 1 = build the global rayon pool with n threads (no-op without the
/// `parallel` feature).
pub fn configure_threads(n: usize) {
    if n == 1 {
        set_sequential(true);
        return;
    }
    #[cfg(feature = "parallel")]
    if n > 1 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let f = |i: usize| (i as f64).sin() * (i as f64 + 0.25).sqrt();
        set_sequential(false);
        let a = map_indexed(1000, f);
        set_sequential(true);
        let b = map_indexed(1000, f);
        set_sequential(false);
        assert_eq!(a, b);
    }

    #[test]
    fn chunked_mutation_covers_all_in_order() {
        let mut data = vec![0usize; 64];
        for_each_chunk_mut(&mut data, 8, |i, c| {
            for (j, x) in c.iter_mut().enumerate() {
                *x = i * 8 + j;
            }
        });
        assert!(data.iter().enumerate().all(|(i, &x)| i == x));
    }
}
