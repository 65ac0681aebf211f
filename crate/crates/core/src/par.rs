//! Thin dispatch layer between the rayon data-parallel path (feature
//! `parallel`, on by default) and the sequential fallback. Callers get
//! order-independent aggregation either way, so results are identical
//! across thread counts.

/// Map `f` over `0..n` and collect results in index order.
#[cfg(feature = "parallel")]
pub fn par_map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    seq_map_indexed(n, f)
}

/// Sequential reference path, always available for benchmarks.
pub fn seq_map_indexed<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}
