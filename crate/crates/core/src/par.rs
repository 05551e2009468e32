//! Work distribution. With the `std` feature loops run on the rayon pool;
//! without it they run in order. Results are identical either way because
//! every work item is a pure function of its index.

use alloc::vec::Vec;

/// Applies `f` to each item. Items are independent.
pub(crate) fn for_each<I, F>(items: Vec<I>, f: F)
where
    I: Send,
    F: Fn(I) + Sync + Send,
{
    #[cfg(feature = "std")]
    {
        use rayon::prelude::*;
        items.into_par_iter().for_each(f);
    }
    #[cfg(not(feature = "std"))]
    items.into_iter().for_each(f);
}

/// `(0..n).map(f).collect()`, order preserved.
pub(crate) fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "std")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().with_min_len(BLOCK).map(f).collect()
    }
    #[cfg(not(feature = "std"))]
    (0..n).map(f).collect()
}

/// Fixed block length for chunked reductions. Block boundaries depend only
/// on the item count, so partial sums combine in the same order on any pool.
pub(crate) const BLOCK: usize = 1024;

pub(crate) fn block_count(n: usize) -> usize {
    n.div_ceil(BLOCK)
}

/// `sum_p f(p)` over `0..n` for a `width`-vector valued `f`, where `f` adds
/// its term into the accumulator. Blocks are summed in index order.
pub(crate) fn block_sum<F>(n: usize, width: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    let partials = map_range(block_count(n), |b| {
        let mut acc = alloc::vec![0.0; width];
        for p in b * BLOCK..((b + 1) * BLOCK).min(n) {
            f(p, &mut acc);
        }
        acc
    });
    let mut total = alloc::vec![0.0; width];
    for part in partials {
        for (t, x) in total.iter_mut().zip(part) {
            *t += x;
        }
    }
    total
}
