//! Order-preserving parallel map. Results are gathered by index, so any
//! subsequent fold runs in the same order whatever the thread count.

use rayon::prelude::*;

use crate::error::Result;

pub(crate) fn map_indexed<R, F>(n: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}
