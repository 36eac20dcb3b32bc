//! Worker pool sized by `LOGBANDIT_THREADS`.

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "LOGBANDIT_THREADS";

/// Requested worker count; `None` means hardware parallelism.
pub fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
    }
}

pub fn pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// Runs `f(0..n)` on the pool; results come back in index order.
/// Runs inline with one thread or on wasm32.
pub fn run_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if cfg!(target_arch = "wasm32") || thread_count()? == Some(1) {
        return (0..n).map(f).collect();
    }
    pool()?.install(|| (0..n).into_par_iter().map(&f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = run_indexed(100, |i| Ok(i * i)).unwrap();
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
        let e = run_indexed(10, |i| if i == 7 { Err(Error::Singular) } else { Ok(i) });
        assert_eq!(e, Err(Error::Singular));
    }
}
