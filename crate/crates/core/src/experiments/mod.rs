//! Monte Carlo estimation, exact oracles and the parameter sweeps.

mod exact;
pub mod seeding;
mod sweep;
mod table;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::strategies::{sample_guess, SourceConfig, Strategy, StrategyError};

pub use exact::{exact_bi_average, exact_bi_success, exact_bi_success_all, exact_bl_success, MAX_EXACT_N};
pub use sweep::{distance_table, sweep_k, sweep_n, sweep_overlap, MonteCarlo, DEFAULT_OVERLAP_GRID};
pub use table::{Axis, SweepEntry, SweepRow, SweepTable, CSV_HEADER};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("n = {n} is too large for exhaustive enumeration (max {max})")]
    TooLarge { n: usize, max: usize },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("noise level {0} is outside [0, 1]")]
    Epsilon(f64),
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Worker pool for trial-level parallelism. Results never depend on the
/// thread count.
pub struct Parallelism {
    pool: rayon::ThreadPool,
}

impl Parallelism {
    /// `threads = 0` uses one worker per available core.
    pub fn new(threads: usize) -> Result<Self, ExperimentError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ExperimentError::ThreadPool(e.to_string()))?;
        Ok(Parallelism { pool })
    }

    pub fn sequential() -> Self {
        Self::new(1).expect("single-thread pool")
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> R {
        self.pool.install(op)
    }
}

/// Change point used by a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChangePoint {
    Fixed(usize),
    /// Trials cycle through `k = 1..n` in order, so each `k` gets
    /// `trials / n` runs (± 1).
    Averaged,
}

/// A success-rate estimate with its binomial standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub strategy: Strategy,
    pub n: usize,
    pub c_squared: f64,
    /// `None` when averaged over all change points.
    pub k: Option<usize>,
    pub epsilon: f64,
    pub trials: usize,
    pub successes: usize,
    /// Trials rejected before they could produce a guess.
    pub invalid: usize,
    pub mean: f64,
    pub std_error: f64,
    pub seed: u64,
}

pub fn binomial_std_error(mean: f64, trials: usize) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    (mean * (1.0 - mean) / trials as f64).sqrt()
}

/// Standard deviation of `resamples` parametric bootstrap replicates of a
/// success count.
pub fn bootstrap_std_error(successes: usize, trials: usize, resamples: usize, seed: u64) -> f64 {
    if trials == 0 || resamples < 2 {
        return 0.0;
    }
    let p = successes as f64 / trials as f64;
    let dist = Binomial::new(trials as u64, p).expect("p in [0, 1]");
    let mut rng = seeding::rng_from_seed(seeding::derive_seed(seed, &[0xb007]));
    let reps: Vec<f64> = (0..resamples).map(|_| dist.sample(&mut rng) as f64 / trials as f64).collect();
    let mean = reps.iter().sum::<f64>() / resamples as f64;
    let var = reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    var.sqrt()
}

impl EstimateWithError {
    pub fn from_counts(
        strategy: Strategy,
        config: (usize, f64, Option<usize>),
        epsilon: f64,
        successes: usize,
        trials: usize,
        invalid: usize,
        seed: u64,
    ) -> Self {
        let (n, c_squared, k) = config;
        let mean = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        EstimateWithError {
            strategy,
            n,
            c_squared,
            k,
            epsilon,
            trials,
            successes,
            invalid,
            mean,
            std_error: binomial_std_error(mean, trials),
            seed,
        }
    }

    /// Replaces the binomial error with a bootstrap estimate.
    pub fn with_bootstrap(mut self, resamples: usize) -> Self {
        self.std_error = bootstrap_std_error(self.successes, self.trials, resamples, self.seed);
        self
    }
}

fn strategy_word(strategy: Strategy) -> u64 {
    match strategy {
        Strategy::BasicLocal => 1,
        Strategy::BayesianInference => 2,
    }
}

/// Seed of one sweep point, derived from everything that identifies it.
pub fn point_seed(
    master_seed: u64,
    strategy: Strategy,
    n: usize,
    c_squared: f64,
    k: ChangePoint,
    epsilon: f64,
) -> u64 {
    let k_word = match k {
        ChangePoint::Fixed(k) => k as u64,
        ChangePoint::Averaged => 0,
    };
    seeding::derive_seed(
        master_seed,
        &[strategy_word(strategy), n as u64, c_squared.to_bits(), k_word, epsilon.to_bits()],
    )
}

/// Runs `trials` independent simulations and counts successes.
///
/// Trial `i` draws from its own ChaCha8 stream seeded by
/// `trial_seed(point_seed, i)`, so the count is independent of scheduling.
#[allow(clippy::too_many_arguments)]
pub fn simulate_success(
    strategy: Strategy,
    n: usize,
    c_squared: f64,
    k: ChangePoint,
    trials: usize,
    epsilon: f64,
    master_seed: u64,
    par: &Parallelism,
) -> Result<EstimateWithError, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::NoTrials);
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(ExperimentError::Epsilon(epsilon));
    }
    let fixed_k = match k {
        ChangePoint::Fixed(k) => Some(k),
        ChangePoint::Averaged => None,
    };
    SourceConfig::new(n, fixed_k.unwrap_or(1), c_squared)?;
    let seed = point_seed(master_seed, strategy, n, c_squared, k, epsilon);

    let successes = par.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let true_k = fixed_k.unwrap_or(i % n + 1);
                let config = SourceConfig { n, k: true_k, c_squared };
                let mut rng = seeding::rng_from_seed(seeding::trial_seed(seed, i as u64));
                sample_guess(strategy, &config, epsilon, &mut rng).map(|g| (g == true_k) as usize)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    })?;

    Ok(EstimateWithError::from_counts(strategy, (n, c_squared, fixed_k), epsilon, successes, trials, 0, seed))
}
