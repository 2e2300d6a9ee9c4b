//! Parameter sweeps over the change point, the overlap and the sequence length.
//!
//! Strategy tags in the emitted tables:
//!
//! | tag           | meaning                                           |
//! |---------------|---------------------------------------------------|
//! | `BL`, `BI`    | Monte Carlo estimates                             |
//! | `BL_exact`    | exact per-k BL success                            |
//! | `BL_theory`   | closed-form k-averaged BL success                 |
//! | `SRM`         | square-root-measurement (global) success          |
//! | `SRM_avg`     | same, repeated on every row of a k sweep          |
//! | `BI_minus_BL` | difference of the BI and BL estimates             |
//! | `SRM_minus_BI`| gap between the global bound and BI               |

use crate::strategies::{bl_success_closed_form, srm_optimal_probability, Strategy};

use super::{
    exact_bl_success, simulate_success, Axis, ChangePoint, EstimateWithError, ExperimentError, Parallelism,
    SweepEntry, SweepRow, SweepTable,
};

/// `{0.01, 0.05, 0.10, …, 0.95, 0.99}`.
pub const DEFAULT_OVERLAP_GRID: [f64; 21] = [
    0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80,
    0.85, 0.90, 0.95, 0.99,
];

/// Monte Carlo settings shared by every sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    /// Trials per estimate (per k for k sweeps, k-averaged otherwise).
    pub trials: usize,
    pub epsilon: f64,
    pub master_seed: u64,
    /// Replace binomial errors with this many bootstrap resamples.
    pub bootstrap: Option<usize>,
}

impl MonteCarlo {
    pub fn new(trials: usize, epsilon: f64, master_seed: u64) -> Self {
        MonteCarlo { trials, epsilon, master_seed, bootstrap: None }
    }

    fn estimate(
        &self,
        strategy: Strategy,
        n: usize,
        c_squared: f64,
        k: ChangePoint,
        par: &Parallelism,
    ) -> Result<SweepEntry, ExperimentError> {
        let mut est: EstimateWithError =
            simulate_success(strategy, n, c_squared, k, self.trials, self.epsilon, self.master_seed, par)?;
        if let Some(r) = self.bootstrap {
            est = est.with_bootstrap(r);
        }
        Ok(SweepEntry::from_estimate(&est))
    }
}

fn sorted_unique(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

fn ordered(strategies: &[Strategy]) -> Vec<Strategy> {
    [Strategy::BasicLocal, Strategy::BayesianInference]
        .into_iter()
        .filter(|s| strategies.contains(s))
        .collect()
}

/// Per-k success for each requested strategy at fixed `(n, c²)`, with the
/// exact BL value and the k-averaged global bound on every row.
pub fn sweep_k(
    strategies: &[Strategy],
    n: usize,
    c_squared: f64,
    mc: &MonteCarlo,
    par: &Parallelism,
) -> Result<SweepTable, ExperimentError> {
    let srm = srm_optimal_probability(n, c_squared);
    let mut rows = Vec::with_capacity(n);
    for k in 1..=n {
        let mut entries = Vec::new();
        for strategy in ordered(strategies) {
            entries.push(mc.estimate(strategy, n, c_squared, ChangePoint::Fixed(k), par)?);
            if strategy == Strategy::BasicLocal {
                entries.push(SweepEntry::exact("BL_exact", exact_bl_success(n, c_squared, k)?));
            }
        }
        entries.push(SweepEntry::exact("SRM_avg", srm));
        rows.push(SweepRow { axis_value: k as f64, entries });
    }
    Ok(SweepTable { axis: Axis::K, master_seed: mc.master_seed, rows })
}

/// k-averaged success against the overlap.
pub fn sweep_overlap(
    strategies: &[Strategy],
    n: usize,
    grid: &[f64],
    mc: &MonteCarlo,
    par: &Parallelism,
) -> Result<SweepTable, ExperimentError> {
    let mut rows = Vec::new();
    for c_squared in sorted_unique(grid) {
        let mut entries = Vec::new();
        for strategy in ordered(strategies) {
            entries.push(mc.estimate(strategy, n, c_squared, ChangePoint::Averaged, par)?);
            if strategy == Strategy::BasicLocal {
                entries.push(SweepEntry::exact("BL_theory", bl_success_closed_form(n, c_squared)));
            }
        }
        entries.push(SweepEntry::exact("SRM", srm_optimal_probability(n, c_squared)));
        rows.push(SweepRow { axis_value: c_squared, entries });
    }
    Ok(SweepTable { axis: Axis::CSquared, master_seed: mc.master_seed, rows })
}

/// k-averaged BI and BL success against `n`, and their difference.
pub fn sweep_n(
    ns: &[usize],
    c_squared: f64,
    mc: &MonteCarlo,
    par: &Parallelism,
) -> Result<SweepTable, ExperimentError> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::new();
    for n in ns {
        let bi = mc.estimate(Strategy::BayesianInference, n, c_squared, ChangePoint::Averaged, par)?;
        let bl = mc.estimate(Strategy::BasicLocal, n, c_squared, ChangePoint::Averaged, par)?;
        let diff = SweepEntry::difference("BI_minus_BL", &bi, &bl);
        let theory = SweepEntry::exact("BL_theory", bl_success_closed_form(n, c_squared));
        rows.push(SweepRow { axis_value: n as f64, entries: vec![bi, bl, theory, diff] });
    }
    Ok(SweepTable { axis: Axis::N, master_seed: mc.master_seed, rows })
}

/// BI's improvement over BL and its remaining gap to the global bound.
/// BL and the bound are exact; only BI is sampled.
pub fn distance_table(
    n: usize,
    grid: &[f64],
    mc: &MonteCarlo,
    par: &Parallelism,
) -> Result<SweepTable, ExperimentError> {
    let mut rows = Vec::new();
    for c_squared in sorted_unique(grid) {
        let bi = mc.estimate(Strategy::BayesianInference, n, c_squared, ChangePoint::Averaged, par)?;
        let bl = SweepEntry::exact("BL_theory", bl_success_closed_form(n, c_squared));
        let srm = SweepEntry::exact("SRM", srm_optimal_probability(n, c_squared));
        let improvement = SweepEntry::difference("BI_minus_BL", &bi, &bl);
        let gap = SweepEntry::difference("SRM_minus_BI", &srm, &bi);
        rows.push(SweepRow { axis_value: c_squared, entries: vec![bi, bl, srm, improvement, gap] });
    }
    Ok(SweepTable { axis: Axis::CSquared, master_seed: mc.master_seed, rows })
}
