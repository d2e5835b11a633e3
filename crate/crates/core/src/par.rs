//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! the rayon pool; without it (or with [`Exec::Sequential`]) it runs in order.
//! Results are always returned in index order, so output never depends on
//! scheduling.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether work actually runs concurrently in this build.
    pub fn is_concurrent(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

pub fn map_range<T, F>(exec: Exec, range: Range<i64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(i64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

pub fn map_slice<S, T, F>(exec: Exec, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree_and_keep_order() {
        let f = |k: i64| (k * k) as f64 / 3.0;
        assert_eq!(map_range(Exec::Sequential, 0..100, f), map_range(Exec::Parallel, 0..100, f));
        let xs: Vec<i64> = (0..50).collect();
        assert_eq!(map_slice(Exec::Parallel, &xs, |&x| x + 1)[49], 50);
    }
}
