//! Thread fan-out for simulation batches and per-item sweeps.
//!
//! Work items are handed out by index and results are stored by index, so
//! the output never depends on the worker count or on scheduling.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use preauction_core::sim::BatchPlan;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PREAUCTION_THREADS";

/// Available parallelism, capped by `PREAUCTION_THREADS` when it is set to
/// a positive integer.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, NonZeroUsize::get);
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap > 0 => available.min(cap),
        _ => available,
    }
}

/// `f(0), ..., f(n - 1)` computed on up to `workers` threads.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let value = f(i);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(value);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers have finished")
        .into_iter()
        .map(|x| x.expect("every index was computed"))
        .collect()
}

/// Runs every batch of `plan` on up to `workers` threads. Bit-identical to
/// [`preauction_core::sim::run_sequential`].
pub fn run_parallel<P: BatchPlan>(plan: &P, workers: usize) -> P::Output {
    let stats = parallel_map(plan.batches(), workers, |b| plan.run_batch(b));
    plan.finish(&stats)
}
