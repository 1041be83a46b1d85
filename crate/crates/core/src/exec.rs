//! Execution mode for the embarrassingly parallel batches (trials, sweeps,
//! permutation averages, per-snapshot evaluations).
//!
//! Results are always collected in index order and any reduction happens
//! afterwards on a single thread, so both modes produce bit-identical output.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

const SEQ: u8 = 0;
const PAR: u8 = 1;

static MODE: AtomicU8 = AtomicU8::new(if cfg!(feature = "parallel") { PAR } else { SEQ });

impl Default for Execution {
    fn default() -> Self {
        current()
    }
}

/// Mode used by every batch operation in the crate.
pub fn current() -> Execution {
    match MODE.load(Ordering::Relaxed) {
        #[cfg(feature = "parallel")]
        PAR => Execution::Parallel,
        _ => Execution::Sequential,
    }
}

/// Switch the process-wide mode. Mainly for benches and tests.
pub fn set_mode(mode: Execution) {
    let v = match mode {
        Execution::Sequential => SEQ,
        #[cfg(feature = "parallel")]
        Execution::Parallel => PAR,
    };
    MODE.store(v, Ordering::Relaxed);
}

/// `(0..n).map(f).collect()`, possibly on the rayon pool.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match current() {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
    }
}

/// `items.iter().map(f).collect()`, possibly on the rayon pool.
pub fn map_slice<A, T, F>(items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    match current() {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
    }
}
