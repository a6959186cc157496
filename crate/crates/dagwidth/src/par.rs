//! Tiny dispatch layer between rayon and the sequential fallback.
//!
//! All call sites use combining operations whose result does not depend
//! on evaluation order (order-preserving map/collect, commutative
//! reductions, first-in-index-order searches), so the two paths are
//! observationally identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map over a slice.
pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
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

/// Index of the first element (in slice order) satisfying `pred`.
pub(crate) fn find_first_index<T, F>(items: &[T], pred: F) -> Option<usize>
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .position_first(|item| pred(item))
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().position(pred)
    }
}
