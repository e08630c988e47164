//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on the
//! rayon pool; without it every call runs sequentially. Results are always
//! returned in index order so callers stay deterministic either way.

use std::ops::Range;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this mode actually runs on more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `f(i)` for every `i` in `range`, in order.
pub fn map_range<R, F>(exec: Execution, range: Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

/// `f(item)` for every element of `items`, in order.
pub fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Splits `range` into contiguous chunks of at most `chunk` indices and maps
/// each chunk; useful when per-index work is tiny.
pub fn map_chunks<R, F>(exec: Execution, range: Range<usize>, chunk: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<usize>) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    let start = range.start;
    let n = range.len().div_ceil(chunk);
    map_range(exec, 0..n, |c| {
        let lo = start + c * chunk;
        let hi = (lo + chunk).min(range.end);
        f(lo..hi)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let seq = map_range(Execution::Sequential, 0..1000, |i| i * i);
        let par = map_range(Execution::Parallel, 0..1000, |i| i * i);
        assert_eq!(seq, par);
        let chunks = map_chunks(Execution::Parallel, 3..20, 4, |r| r.len());
        assert_eq!(chunks, vec![4, 4, 4, 4, 1]);
        let v = [1, 2, 3];
        assert_eq!(map_slice(Execution::Parallel, &v, |x| x + 1), vec![2, 3, 4]);
    }
}
