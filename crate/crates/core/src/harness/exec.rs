use crate::error::Result;

/// Evaluates `f(0..count)` and returns the results in index order.
///
/// `workers == 1` or a build without the `parallel` feature runs on the
/// calling thread; `0` lets rayon pick the thread count.
pub fn map_indexed<T, F>(count: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers != 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| crate::error::Error::InvalidState(format!("thread pool: {e}")))?;
        return pool.install(|| (0..count).into_par_iter().map(&f).collect());
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn ordered_and_equal_across_workers() {
        let f = |i: u64| Ok((i as f64).sqrt());
        let a = map_indexed(1000, 1, f).unwrap();
        for w in [0, 2, 3] {
            assert_eq!(a, map_indexed(1000, w, f).unwrap());
        }
    }

    #[test]
    fn propagates_errors() {
        let r: Result<Vec<u64>> = map_indexed(10, 2, |i| {
            if i == 7 {
                Err(Error::invalid("boom"))
            } else {
                Ok(i)
            }
        });
        assert!(r.is_err());
    }
}
