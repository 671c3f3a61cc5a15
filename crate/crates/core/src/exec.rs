//! Data-parallel execution with a sequential fallback.
//!
//! `Exec::Parallel` uses rayon when the `parallel` feature is enabled and
//! silently runs sequentially otherwise. Results never depend on the choice:
//! every reduction here is an exact, commutative field operation.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Folds `0..n` into per-worker accumulators, then merges them.
    pub fn fold_range<A, I, F, M>(self, n: u64, init: I, fold: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(A, u64) -> A + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && n > 1 {
            return (0..n).into_par_iter().fold(&init, &fold).reduce(&init, &merge);
        }
        let _ = &merge;
        (0..n).fold(init(), fold)
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() > 1 {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let sum = |e: Exec| e.fold_range(1000, || 0u64, |a, i| a + i * i, |a, b| a + b);
        assert_eq!(sum(Exec::Sequential), sum(Exec::Parallel));
        let v: Vec<u32> = (0..100).collect();
        assert_eq!(Exec::Parallel.map(&v, |x| x * 2), Exec::Sequential.map(&v, |x| x * 2));
    }
}
