use std::sync::{Condvar, Mutex};

use crate::par::Exec;

/// Bounds how many handshake computations run at once.
///
/// With the `parallel` feature and [`Exec::Parallel`] this is a dedicated
/// rayon pool of `workers` threads; otherwise a counting semaphore admits
/// `workers` callers at a time onto their own threads.
pub struct ComputePool {
    workers: usize,
    inner: Inner,
}

enum Inner {
    #[cfg(feature = "parallel")]
    Rayon(rayon::ThreadPool),
    Gate {
        free: Mutex<usize>,
        cv: Condvar,
    },
}

impl ComputePool {
    /// `workers` is clamped to at least 1.
    pub fn new(workers: usize, exec: Exec) -> Self {
        let workers = workers.max(1);
        #[cfg(feature = "parallel")]
        if exec.is_parallel() {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .thread_name(|i| format!("pqtls-worker-{i}"))
                .build()
            {
                return Self {
                    workers,
                    inner: Inner::Rayon(pool),
                };
            }
        }
        #[cfg(not(feature = "parallel"))]
        let _ = exec;
        Self {
            workers,
            inner: Inner::Gate {
                free: Mutex::new(workers),
                cv: Condvar::new(),
            },
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.inner {
            #[cfg(feature = "parallel")]
            Inner::Rayon(pool) => pool.install(f),
            Inner::Gate { free, cv } => {
                let mut n = cv.wait_while(free.lock().unwrap(), |n| *n == 0).unwrap();
                *n -= 1;
                drop(n);
                struct Release<'a>(&'a Mutex<usize>, &'a Condvar);
                impl Drop for Release<'_> {
                    fn drop(&mut self) {
                        *self.0.lock().unwrap() += 1;
                        self.1.notify_one();
                    }
                }
                let _release = Release(free, cv);
                f()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;
    use std::time::Duration;

    fn peak_concurrency(exec: Exec, workers: usize) -> usize {
        let pool = Arc::new(ComputePool::new(workers, exec));
        let live = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (pool, live, peak) = (pool.clone(), live.clone(), peak.clone());
                std::thread::spawn(move || {
                    pool.run(|| {
                        let now = live.fetch_add(1, Ordering::SeqCst) + 1;
                        peak.fetch_max(now, Ordering::SeqCst);
                        std::thread::sleep(Duration::from_millis(20));
                        live.fetch_sub(1, Ordering::SeqCst);
                    })
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        peak.load(Ordering::SeqCst)
    }

    #[test]
    fn concurrency_is_bounded() {
        for exec in [Exec::Parallel, Exec::Sequential] {
            assert_eq!(peak_concurrency(exec, 1), 1);
            assert!(peak_concurrency(exec, 3) <= 3);
        }
    }
}
