//! Python bindings for `qcpd-core`.
//!
//! Strategies are passed as strings (`"BL"` or `"BI"`), states as
//! `(amp_h, amp_v)` tuples and operators as nested 2×2 lists.

use std::str::FromStr;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use qcpd_core::experiments::{self, seeding, ChangePoint, MonteCarlo, Parallelism};
use qcpd_core::pipeline::{self, EventRates, PipelineError, TimingConfig};
use qcpd_core::quantum::{self, QubitState};
use qcpd_core::strategies;
use qcpd_core::{ExperimentError, Operator2, SourceConfig, Strategy, StrategyError};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn experiment_err(e: ExperimentError) -> PyErr {
    match e {
        ExperimentError::Io(io) => PyIOError::new_err(io.to_string()),
        other => value_err(other),
    }
}

fn pipeline_err(e: PipelineError) -> PyErr {
    match e {
        PipelineError::Io(io) => PyIOError::new_err(io.to_string()),
        other => value_err(other),
    }
}

fn strategy(name: &str) -> PyResult<Strategy> {
    Strategy::from_str(name).map_err(PyValueError::new_err)
}

fn matrix(op: &Operator2) -> [[f64; 2]; 2] {
    [[op.m00, op.m01], [op.m01, op.m11]]
}

fn state((amp_h, amp_v): (f64, f64)) -> PyResult<QubitState> {
    QubitState::normalized(amp_h, amp_v).ok_or_else(|| PyValueError::new_err("state must be non-zero"))
}

fn parallelism(threads: usize) -> PyResult<Parallelism> {
    Parallelism::new(threads).map_err(experiment_err)
}

/// Two-outcome projective measurement.
#[pyclass(name = "Measurement", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMeasurement {
    inner: qcpd_core::BinaryMeasurement,
}

#[pymethods]
impl PyMeasurement {
    /// Projector for outcome 0 as a 2×2 list.
    #[getter]
    fn pi_0(&self) -> [[f64; 2]; 2] {
        matrix(&self.inner.pi_0)
    }

    #[getter]
    fn pi_1(&self) -> [[f64; 2]; 2] {
        matrix(&self.inner.pi_1)
    }

    /// Polarization angle in radians of the state giving outcome 0 for sure,
    /// or `None` if `Π₀` is not rank one.
    #[getter]
    fn zero_angle(&self) -> Option<f64> {
        self.inner.zero_angle()
    }

    fn probabilities(&self, amplitudes: (f64, f64)) -> PyResult<(f64, f64)> {
        Ok(quantum::outcome_probabilities(&state(amplitudes)?, &self.inner))
    }

    fn __repr__(&self) -> String {
        match self.inner.zero_angle() {
            Some(a) => format!("Measurement(zero_angle={a:.6})"),
            None => format!("Measurement(rank_zero={})", self.inner.rank_zero()),
        }
    }
}

/// One complete detection run.
#[pyclass(name = "TrialRecord", frozen)]
struct PyTrialRecord {
    inner: strategies::TrialRecord,
}

#[pymethods]
impl PyTrialRecord {
    #[getter]
    fn strategy(&self) -> &'static str {
        self.inner.strategy.tag()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.config.n
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.config.k
    }

    #[getter]
    fn c_squared(&self) -> f64 {
        self.inner.config.c_squared
    }

    #[getter]
    fn outcomes(&self) -> Vec<u8> {
        self.inner.outcomes.iter().map(|&o| o as u8).collect()
    }

    /// Measurement used for each photon.
    #[getter]
    fn bases(&self) -> Vec<PyMeasurement> {
        self.inner.bases.iter().map(|&m| PyMeasurement { inner: m }).collect()
    }

    /// `n + 1` prior vectors, uniform first (empty for BL).
    #[getter]
    fn priors(&self) -> Vec<Vec<f64>> {
        self.inner.prior_history.iter().map(|p| p.eta.clone()).collect()
    }

    #[getter]
    fn guess(&self) -> usize {
        self.inner.guess
    }

    #[getter]
    fn success(&self) -> bool {
        self.inner.success
    }

    #[getter]
    fn seed(&self) -> Option<u64> {
        self.inner.seed
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "TrialRecord(strategy={}, n={}, k={}, guess={}, success={})",
            self.inner.strategy,
            self.inner.config.n,
            self.inner.config.k,
            self.inner.guess,
            if self.inner.success { "True" } else { "False" }
        )
    }
}

/// Monte Carlo success estimate.
#[pyclass(name = "Estimate", frozen, get_all)]
struct PyEstimate {
    strategy: String,
    n: usize,
    c_squared: f64,
    k: Option<usize>,
    epsilon: f64,
    trials: usize,
    successes: usize,
    invalid: usize,
    mean: f64,
    std_error: f64,
    seed: u64,
}

impl From<experiments::EstimateWithError> for PyEstimate {
    fn from(e: experiments::EstimateWithError) -> Self {
        PyEstimate {
            strategy: e.strategy.tag().into(),
            n: e.n,
            c_squared: e.c_squared,
            k: e.k,
            epsilon: e.epsilon,
            trials: e.trials,
            successes: e.successes,
            invalid: e.invalid,
            mean: e.mean,
            std_error: e.std_error,
            seed: e.seed,
        }
    }
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate({} mean={:.5} ± {:.5}, trials={})",
            self.strategy, self.mean, self.std_error, self.trials
        )
    }
}

/// Result of a parameter sweep.
#[pyclass(name = "SweepTable", frozen)]
struct PySweepTable {
    inner: experiments::SweepTable,
}

#[pymethods]
impl PySweepTable {
    #[getter]
    fn axis(&self) -> &'static str {
        self.inner.axis.name()
    }

    #[getter]
    fn strategies(&self) -> Vec<String> {
        self.inner.strategies()
    }

    /// `(axis_value, strategy, mean, std_error, trials)` tuples.
    fn rows(&self) -> Vec<(f64, String, f64, f64, usize)> {
        self.inner
            .rows
            .iter()
            .flat_map(|r| {
                r.entries
                    .iter()
                    .map(move |e| (r.axis_value, e.strategy.clone(), e.mean, e.std_error, e.trials))
            })
            .collect()
    }

    /// Means of one strategy in axis order (`None` where absent).
    fn series(&self, strategy: &str) -> Vec<Option<f64>> {
        self.inner.rows.iter().map(|r| r.get(strategy).map(|e| e.mean)).collect()
    }

    #[getter]
    fn axis_values(&self) -> Vec<f64> {
        self.inner.rows.iter().map(|r| r.axis_value).collect()
    }

    fn to_csv(&self) -> PyResult<String> {
        self.inner.to_csv_string().map_err(experiment_err)
    }

    fn summary(&self) -> String {
        self.inner.summary()
    }

    fn __repr__(&self) -> String {
        format!("SweepTable(axis={}, rows={})", self.inner.axis, self.inner.rows.len())
    }
}

/// `|φ⟩ = c|H⟩ + √(1−c²)|V⟩` as `(amp_h, amp_v)`.
#[pyfunction]
fn make_mutated_state(c2: f64) -> PyResult<(f64, f64)> {
    let s = quantum::make_mutated_state(c2).map_err(value_err)?;
    Ok((s.amp_h, s.amp_v))
}

/// Helstrom measurement discriminating `|H⟩` (weight `p_h`) from `|φ⟩`.
#[pyfunction]
fn helstrom_measurement(p_h: f64, p_phi: f64, c2: f64) -> PyResult<PyMeasurement> {
    let inner = quantum::helstrom_measurement(p_h, p_phi, c2).map_err(value_err)?;
    Ok(PyMeasurement { inner })
}

#[pyfunction]
fn srm_optimal_probability(n: usize, c2: f64) -> PyResult<f64> {
    if n == 0 || !(0.0..=1.0).contains(&c2) {
        return Err(PyValueError::new_err("need n ≥ 1 and c² in [0, 1]"));
    }
    Ok(strategies::srm_optimal_probability(n, c2))
}

#[pyfunction]
fn bl_success_closed_form(n: usize, c2: f64) -> f64 {
    strategies::bl_success_closed_form(n, c2)
}

/// Exact BI success per change point (`k=None`) or for one `k`.
#[pyfunction]
#[pyo3(signature = (n, c2, k=None))]
fn exact_bi_success(py: Python<'_>, n: usize, c2: f64, k: Option<usize>) -> PyResult<Py<PyAny>> {
    let all = py.detach(|| experiments::exact_bi_success_all(n, c2)).map_err(experiment_err)?;
    match k {
        None => Ok(all.into_pyobject(py)?.into_any().unbind()),
        Some(k) if (1..=n).contains(&k) => Ok(all[k - 1].into_pyobject(py)?.into_any().unbind()),
        Some(k) => Err(PyValueError::new_err(format!("k = {k} outside 1..={n}"))),
    }
}

#[pyfunction]
fn exact_bl_success(n: usize, c2: f64, k: usize) -> PyResult<f64> {
    experiments::exact_bl_success(n, c2, k).map_err(experiment_err)
}

/// Simulates one run; outcomes are flipped with probability `epsilon`.
#[pyfunction]
#[pyo3(signature = (strategy, n, c2, k, seed=0, epsilon=0.0))]
fn run_trial(
    strategy: &str,
    n: usize,
    c2: f64,
    k: usize,
    seed: u64,
    epsilon: f64,
) -> PyResult<PyTrialRecord> {
    let s = self::strategy(strategy)?;
    let config = SourceConfig::new(n, k, c2).map_err(value_err)?;
    let mut rng = seeding::rng_from_seed(seed);
    let mut inner = strategies::run_trial(s, &config, epsilon, &mut rng).map_err(value_err)?;
    inner.seed = Some(seed);
    Ok(PyTrialRecord { inner })
}

/// Runs a detector on a given outcome sequence (0/1 per photon).
#[pyfunction]
fn replay(strategy: &str, n: usize, c2: f64, k: usize, outcomes: Vec<u8>) -> PyResult<PyTrialRecord> {
    let s = self::strategy(strategy)?;
    let config = SourceConfig::new(n, k, c2).map_err(value_err)?;
    let bits: Vec<bool> = outcomes.iter().map(|&o| o != 0).collect();
    let inner = strategies::replay(s, &config, &bits).map_err(|e: StrategyError| value_err(e))?;
    Ok(PyTrialRecord { inner })
}

/// Success rate over `trials` runs; `k=None` cycles through every change point.
#[pyfunction]
#[pyo3(signature = (strategy, n, c2, k=None, trials=20_000, epsilon=0.0, seed=2024, threads=0))]
#[allow(clippy::too_many_arguments)]
fn simulate_success(
    py: Python<'_>,
    strategy: &str,
    n: usize,
    c2: f64,
    k: Option<usize>,
    trials: usize,
    epsilon: f64,
    seed: u64,
    threads: usize,
) -> PyResult<PyEstimate> {
    let s = self::strategy(strategy)?;
    let par = parallelism(threads)?;
    let k = k.map_or(ChangePoint::Averaged, ChangePoint::Fixed);
    let est = py
        .detach(|| experiments::simulate_success(s, n, c2, k, trials, epsilon, seed, &par))
        .map_err(experiment_err)?;
    Ok(est.into())
}

fn strategies_list(names: Vec<String>) -> PyResult<Vec<Strategy>> {
    names.iter().map(|n| strategy(n)).collect()
}

#[pyfunction]
#[pyo3(signature = (n, c2, strategies=vec!["BL".to_string(), "BI".to_string()], trials=20_000, epsilon=0.0, seed=2024, threads=0))]
#[allow(clippy::too_many_arguments)]
fn sweep_k(
    py: Python<'_>,
    n: usize,
    c2: f64,
    strategies: Vec<String>,
    trials: usize,
    epsilon: f64,
    seed: u64,
    threads: usize,
) -> PyResult<PySweepTable> {
    let list = strategies_list(strategies)?;
    let par = parallelism(threads)?;
    let mc = MonteCarlo::new(trials, epsilon, seed);
    let inner = py.detach(|| experiments::sweep_k(&list, n, c2, &mc, &par)).map_err(experiment_err)?;
    Ok(PySweepTable { inner })
}

#[pyfunction]
#[pyo3(signature = (n, grid=None, strategies=vec!["BL".to_string(), "BI".to_string()], trials=20_000, epsilon=0.0, seed=2024, threads=0))]
#[allow(clippy::too_many_arguments)]
fn sweep_overlap(
    py: Python<'_>,
    n: usize,
    grid: Option<Vec<f64>>,
    strategies: Vec<String>,
    trials: usize,
    epsilon: f64,
    seed: u64,
    threads: usize,
) -> PyResult<PySweepTable> {
    let list = strategies_list(strategies)?;
    let grid = grid.unwrap_or_else(|| experiments::DEFAULT_OVERLAP_GRID.to_vec());
    let par = parallelism(threads)?;
    let mc = MonteCarlo::new(trials, epsilon, seed);
    let inner =
        py.detach(|| experiments::sweep_overlap(&list, n, &grid, &mc, &par)).map_err(experiment_err)?;
    Ok(PySweepTable { inner })
}

#[pyfunction]
#[pyo3(signature = (ns, c2, trials=20_000, epsilon=0.0, seed=2024, threads=0))]
fn sweep_n(
    py: Python<'_>,
    ns: Vec<usize>,
    c2: f64,
    trials: usize,
    epsilon: f64,
    seed: u64,
    threads: usize,
) -> PyResult<PySweepTable> {
    let par = parallelism(threads)?;
    let mc = MonteCarlo::new(trials, epsilon, seed);
    let inner = py.detach(|| experiments::sweep_n(&ns, c2, &mc, &par)).map_err(experiment_err)?;
    Ok(PySweepTable { inner })
}

#[pyfunction]
#[pyo3(signature = (n, grid=None, trials=20_000, epsilon=0.0, seed=2024, threads=0))]
fn distance_table(
    py: Python<'_>,
    n: usize,
    grid: Option<Vec<f64>>,
    trials: usize,
    epsilon: f64,
    seed: u64,
    threads: usize,
) -> PyResult<PySweepTable> {
    let grid = grid.unwrap_or_else(|| experiments::DEFAULT_OVERLAP_GRID.to_vec());
    let par = parallelism(threads)?;
    let mc = MonteCarlo::new(trials, epsilon, seed);
    let inner = py.detach(|| experiments::distance_table(n, &grid, &mc, &par)).map_err(experiment_err)?;
    Ok(PySweepTable { inner })
}

/// Synthetic event file (CSV text) measured in a fixed basis whose
/// outcome-0 state sits at `basis_angle` radians.
#[pyfunction]
#[pyo3(signature = (n, c2, k, frames=1, pairs_per_bin=1.0, background_per_ms=0.0, basis_angle=0.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn generate_events(
    n: usize,
    c2: f64,
    k: usize,
    frames: usize,
    pairs_per_bin: f64,
    background_per_ms: f64,
    basis_angle: f64,
    seed: u64,
) -> PyResult<(String, Vec<Vec<Option<u8>>>)> {
    let source = SourceConfig::new(n, k, c2).map_err(value_err)?;
    let basis = qcpd_core::BinaryMeasurement::from_zero_state(&QubitState {
        amp_h: basis_angle.cos(),
        amp_v: basis_angle.sin(),
    });
    let rates = EventRates { pairs_per_bin, background_per_ms };
    let mut rng = seeding::rng_from_seed(seed);
    let stream = pipeline::generate_stream(
        &TimingConfig::with_bins(n),
        &source,
        frames,
        &rates,
        |_, _| basis,
        &mut rng,
    )
    .map_err(pipeline_err)?;
    let mut buf = Vec::new();
    pipeline::write_events(&mut buf, &stream.events).map_err(pipeline_err)?;
    let planted = stream.planted.iter().map(|f| f.iter().map(|o| o.map(u8::from)).collect()).collect();
    Ok((String::from_utf8(buf).expect("utf-8 csv"), planted))
}

/// Postselected outcome per trigger frame and bin (`None` for empty bins).
#[pyfunction]
fn postselect(events_csv: &str, n: usize) -> PyResult<Vec<Vec<Option<u8>>>> {
    let events = pipeline::read_events(events_csv.as_bytes()).map_err(pipeline_err)?;
    let frames = pipeline::postselect_bins(&events, &TimingConfig::with_bins(n)).map_err(pipeline_err)?;
    Ok(frames.iter().map(|f| f.outcomes().into_iter().map(|o| o.map(u8::from)).collect()).collect())
}

#[pymodule]
fn qcpd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyMeasurement>()?;
    m.add_class::<PyTrialRecord>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PySweepTable>()?;
    m.add_function(wrap_pyfunction!(make_mutated_state, m)?)?;
    m.add_function(wrap_pyfunction!(helstrom_measurement, m)?)?;
    m.add_function(wrap_pyfunction!(srm_optimal_probability, m)?)?;
    m.add_function(wrap_pyfunction!(bl_success_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(exact_bi_success, m)?)?;
    m.add_function(wrap_pyfunction!(exact_bl_success, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_success, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_k, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_n, m)?)?;
    m.add_function(wrap_pyfunction!(distance_table, m)?)?;
    m.add_function(wrap_pyfunction!(generate_events, m)?)?;
    m.add_function(wrap_pyfunction!(postselect, m)?)?;
    Ok(())
}
