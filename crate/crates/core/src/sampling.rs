//! Seeded Monte Carlo estimation split across a fixed number of workers.
//!
//! Worker `w` draws from stream `w` of the master seed and processes a fixed
//! contiguous share of the samples; partial moments are merged in worker
//! order. The result depends on the master seed and the worker count only,
//! never on thread scheduling or on whether the workers run in parallel.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::random::{stream_rng, SimRng};

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateResult {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl EstimateResult {
    /// A value known without sampling error.
    pub fn exact(value: f64, n_samples: u64, seed: u64) -> Self {
        Self {
            mean: value,
            stderr: 0.0,
            n_samples,
            seed,
        }
    }

    /// `|mean - target| ≤ k·stderr + floor`.
    pub fn within(&self, target: f64, k: f64, floor: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + floor
    }
}

/// Running mean and variance (Welford), plus accumulated inner variances from
/// nested estimation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    inner_var_sum: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.push_nested(x, 0.0);
    }

    /// Adds a sample that is itself an estimate with variance `inner_var`.
    pub fn push_nested(&mut self, x: f64, inner_var: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
        self.inner_var_sum += inner_var;
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / n as f64;
        self.inner_var_sum += other.inner_var_sum;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    /// `sqrt(s²/n + mean inner variance)`. The inner term does not shrink
    /// with `n` because it enters through a nonlinear map (`|·|`) and acts as
    /// a bias rather than as noise.
    pub fn estimate(&self, seed: u64) -> EstimateResult {
        let n = self.n.max(1) as f64;
        let var = self.variance() / n + self.inner_var_sum / n;
        EstimateResult {
            mean: self.mean,
            stderr: var.sqrt(),
            n_samples: self.n,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threading {
    Parallel,
    Sequential,
}

/// Worker layout for an estimator. `workers` participates in the seed
/// splitting; `threading` does not affect results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Execution {
    pub workers: usize,
    pub threading: Threading,
}

impl Execution {
    pub fn new(workers: usize) -> Self {
        Self {
            workers: workers.max(1),
            threading: Threading::Parallel,
        }
    }

    pub fn sequential(workers: usize) -> Self {
        Self {
            workers: workers.max(1),
            threading: Threading::Sequential,
        }
    }

    pub fn with_threading(self, threading: Threading) -> Self {
        Self { threading, ..self }
    }
}

impl Default for Execution {
    fn default() -> Self {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self::new(workers)
    }
}

/// Runs `f(w)` for every worker index and returns the results in worker order.
pub fn run_workers<T, F>(exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed(exec.threading, exec.workers.max(1), f)
}

/// Maps `0..len` through `f`, in parallel when allowed; output order is index order.
pub fn map_indexed<T, F>(threading: Threading, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if threading == Threading::Parallel {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = threading;
    (0..len).map(f).collect()
}

/// Sample counts per worker: an even split with the remainder going to the
/// lowest worker indices.
pub fn worker_shares(n_samples: u64, workers: usize) -> Vec<u64> {
    let w = workers.max(1) as u64;
    (0..w)
        .map(|i| n_samples / w + u64::from(i < n_samples % w))
        .collect()
}

/// Estimates `K` expectations at once. Each call of `sample` draws one
/// sample and returns, per slot, the value and its inner variance (zero for
/// plain samples).
pub fn estimate_many<const K: usize, F>(
    n_samples: u64,
    seed: u64,
    exec: Execution,
    sample: F,
) -> Result<[EstimateResult; K]>
where
    F: Fn(&mut SimRng) -> Result<[(f64, f64); K]> + Sync + Send,
{
    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "at least 2 samples are required, got {n_samples}"
        )));
    }
    let shares = worker_shares(n_samples, exec.workers);
    let partials = run_workers(exec, |w| -> Result<[Moments; K]> {
        let mut rng = stream_rng(seed, w as u64);
        let mut moments = [Moments::default(); K];
        for _ in 0..shares[w] {
            let values = sample(&mut rng)?;
            for (m, (x, inner)) in moments.iter_mut().zip(values) {
                m.push_nested(x, inner);
            }
        }
        Ok(moments)
    });
    let mut total = [Moments::default(); K];
    for part in partials {
        for (t, m) in total.iter_mut().zip(part?) {
            t.merge(&m);
        }
    }
    Ok(total.map(|m| m.estimate(seed)))
}

/// Single-slot form of [`estimate_many`].
pub fn estimate<F>(n_samples: u64, seed: u64, exec: Execution, sample: F) -> Result<EstimateResult>
where
    F: Fn(&mut SimRng) -> Result<(f64, f64)> + Sync + Send,
{
    let [r] = estimate_many::<1, _>(n_samples, seed, exec, |rng| Ok([sample(rng)?]))?;
    Ok(r)
}
