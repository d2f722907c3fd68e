//! Deterministic evaluation grids.

use crate::scalar::{cast, Scalar};

/// `n` linearly spaced points from `lo` to `hi` inclusive.
///
/// Returns `[lo]` for `n <= 1`. Endpoints are exact.
pub fn lin_spaced<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n <= 1 {
        return vec![lo];
    }
    let last = n - 1;
    let step = (hi - lo) / cast(last as f64);
    (0..=last)
        .map(|i| {
            if i == last {
                hi
            } else {
                lo + step * cast(i as f64)
            }
        })
        .collect()
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
///
/// Both bounds must be positive. Intensity grids use this spacing since
/// the interesting behavior concentrates near zero.
pub fn log_spaced<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(
        lo > T::zero() && hi > T::zero(),
        "log grid needs positive bounds"
    );
    if n <= 1 {
        return vec![lo];
    }
    let last = n - 1;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / cast(last as f64);
    (0..=last)
        .map(|i| {
            if i == last {
                hi
            } else if i == 0 {
                lo
            } else {
                (llo + step * cast(i as f64)).exp()
            }
        })
        .collect()
}
