//! Data-parallel helpers: sampled sweeps and report rows are independent,
//! so they fan out over rayon when the `parallel` feature is on. `ExecMode`
//! selects at runtime between the parallel and sequential paths so the two
//! can be compared on the same build.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Parallel,
    Sequential,
}

impl ExecMode {
    pub fn effective_parallel(self) -> bool {
        match self {
            ExecMode::Parallel => cfg!(feature = "parallel"),
            ExecMode::Sequential => false,
        }
    }
}

/// Map `f` over `items`, in parallel when the mode and feature allow it.
/// Output order matches input order either way.
pub fn map_collect<T, U, F>(mode: ExecMode, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if mode.effective_parallel() {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    items.into_iter().map(f).collect()
}

/// Range version of [`map_collect`].
pub fn map_range<U, F>(mode: ExecMode, n: u64, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(u64) -> U + Send + Sync,
{
    map_collect(mode, (0..n).collect::<Vec<_>>(), f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let seq = map_range(ExecMode::Sequential, 100, |i| i * i);
        let par = map_range(ExecMode::Parallel, 100, |i| i * i);
        assert_eq!(seq, par);
    }
}
