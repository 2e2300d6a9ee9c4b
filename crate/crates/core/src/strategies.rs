//! Change point detection strategies.
//!
//! A source emits `n` photons; photons `1..k-1` are in `|H⟩` and photons
//! `k..n` in `|φ⟩`. Two online detectors consume one outcome per photon:
//!
//! * [`BasicLocalDetector`] measures every photon in `{|H⟩, |V⟩}` and guesses
//!   the position of the first "1".
//! * [`BayesianDetector`] keeps a prior over the change point, measures each
//!   photon in the Helstrom basis of the two most likely hypotheses and
//!   updates the prior with Bayes' rule.
//!
//! [`srm_optimal_probability`] gives the success probability of the global
//! square-root measurement, the reference both are compared against.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{
    helstrom_measurement, make_mutated_state, outcome_probabilities, BinaryMeasurement, QuantumError,
    QubitState,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("invalid source configuration: {0}")]
    InvalidConfig(String),
    #[error("outcome {outcome} at step {step} has zero probability under every live hypothesis")]
    ImpossibleOutcome { step: usize, outcome: u8 },
    #[error("expected {expected} outcomes, got {got}")]
    OutcomeCount { expected: usize, got: usize },
    #[error("no measurement pending: all {0} photons already observed")]
    Finished(usize),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Which online detector to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "BL")]
    BasicLocal,
    #[serde(rename = "BI")]
    BayesianInference,
}

impl Strategy {
    pub fn tag(&self) -> &'static str {
        match self {
            Strategy::BasicLocal => "BL",
            Strategy::BayesianInference => "BI",
        }
    }

    pub fn detector(&self, n: usize, c_squared: f64) -> Result<Box<dyn Detector>, StrategyError> {
        Ok(match self {
            Strategy::BasicLocal => Box::new(BasicLocalDetector::new(n)?),
            Strategy::BayesianInference => Box::new(BayesianDetector::new(n, c_squared)?),
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bl" | "basic-local" => Ok(Strategy::BasicLocal),
            "bi" | "bayesian" | "bayesian-inference" => Ok(Strategy::BayesianInference),
            other => Err(format!("unknown strategy '{other}' (expected BL or BI)")),
        }
    }
}

/// Sequence length, true change point and overlap of one source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub n: usize,
    pub k: usize,
    pub c_squared: f64,
}

impl SourceConfig {
    pub fn new(n: usize, k: usize, c_squared: f64) -> Result<Self, StrategyError> {
        if n == 0 {
            return Err(StrategyError::InvalidConfig("n must be at least 1".into()));
        }
        if k == 0 || k > n {
            return Err(StrategyError::InvalidConfig(format!("k = {k} is outside [1, {n}]")));
        }
        make_mutated_state(c_squared)?;
        Ok(SourceConfig { n, k, c_squared })
    }

    pub fn mutated_state(&self) -> QubitState {
        make_mutated_state(self.c_squared).expect("validated on construction")
    }

    /// The state actually emitted at (1-based) position `s`.
    pub fn true_state(&self, s: usize) -> QubitState {
        if s < self.k {
            QubitState::H
        } else {
            self.mutated_state()
        }
    }
}

/// Posterior `η_k = p(k | r₁ … r_{step−1})` over change points `k = 1..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorVector {
    pub eta: Vec<f64>,
    /// 1-based index of the next photon to measure; `n + 1` once all are seen.
    pub step: usize,
}

impl PriorVector {
    pub fn uniform(n: usize) -> Self {
        PriorVector { eta: vec![1.0 / n as f64; n], step: 1 }
    }

    pub fn n(&self) -> usize {
        self.eta.len()
    }

    /// `η_k` for a 1-based hypothesis.
    pub fn get(&self, k: usize) -> f64 {
        self.eta[k - 1]
    }
}

/// `(p_H, p_φ)`: the largest prior among hypotheses under which photon `step`
/// is still `|H⟩` (`k > step`) and among those where it is `|φ⟩` (`k ≤ step`).
/// `p_H` is zero at the last step.
pub fn bi_hypothesis_weights(prior: &PriorVector) -> (f64, f64) {
    let split = prior.step.min(prior.n());
    let max_of = |xs: &[f64]| xs.iter().copied().fold(0.0, f64::max);
    (max_of(&prior.eta[split..]), max_of(&prior.eta[..split]))
}

/// `p(r_s | k)`: the Born probability of `outcome` at photon `s` if the change
/// happened at `k`.
pub fn bi_likelihood(
    k: usize,
    s: usize,
    outcome: bool,
    meas: &BinaryMeasurement,
    c_squared: f64,
) -> Result<f64, QuantumError> {
    let state = if k > s { QubitState::H } else { make_mutated_state(c_squared)? };
    let (p0, p1) = outcome_probabilities(&state, meas);
    Ok(if outcome { p1 } else { p0 })
}

fn bayes_step(
    prior: &PriorVector,
    outcome: bool,
    meas: &BinaryMeasurement,
    mutated: &QubitState,
) -> Result<PriorVector, StrategyError> {
    let s = prior.step;
    let pick = |(p0, p1): (f64, f64)| if outcome { p1 } else { p0 };
    let like_h = pick(outcome_probabilities(&QubitState::H, meas));
    let like_phi = pick(outcome_probabilities(mutated, meas));

    // Hypotheses k ≤ s saw |φ⟩ at photon s; k > s saw |H⟩.
    let split = s.min(prior.n());
    let mut eta = prior.eta.clone();
    eta[..split].iter_mut().for_each(|e| *e *= like_phi);
    eta[split..].iter_mut().for_each(|e| *e *= like_h);
    let total: f64 = eta.iter().sum();
    // Also catches NaN.
    if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(StrategyError::ImpossibleOutcome { step: s, outcome: outcome as u8 });
    }
    eta.iter_mut().for_each(|e| *e /= total);
    Ok(PriorVector { eta, step: s + 1 })
}

/// Bayes update of the prior after observing `outcome` on photon `prior.step`.
pub fn bi_update(
    prior: &PriorVector,
    outcome: bool,
    meas: &BinaryMeasurement,
    c_squared: f64,
) -> Result<PriorVector, StrategyError> {
    bayes_step(prior, outcome, meas, &make_mutated_state(c_squared)?)
}

/// Maximum a posteriori change point; ties go to the smallest index.
pub fn guess_from_prior(prior: &PriorVector) -> usize {
    let mut best = 0;
    for (i, &e) in prior.eta.iter().enumerate() {
        if e > prior.eta[best] {
            best = i;
        }
    }
    best + 1
}

/// An online detector: asks for a basis, receives the outcome, repeats `n`
/// times, then guesses.
pub trait Detector: Send {
    fn n(&self) -> usize;

    /// 1-based index of the photon about to be measured.
    fn step(&self) -> usize;

    /// Basis for the photon at [`Detector::step`].
    fn measurement(&self) -> Result<BinaryMeasurement, StrategyError>;

    /// Feed the outcome for the current photon. `true` is the "1" result.
    fn observe(&mut self, outcome: bool) -> Result<(), StrategyError>;

    /// Skip the current photon without learning from it.
    fn discard(&mut self);

    fn guess(&self) -> usize;

    fn prior(&self) -> Option<&PriorVector> {
        None
    }
}

/// Fixed computational-basis detector.
#[derive(Debug, Clone)]
pub struct BasicLocalDetector {
    n: usize,
    step: usize,
    first_click: Option<usize>,
}

impl BasicLocalDetector {
    pub fn new(n: usize) -> Result<Self, StrategyError> {
        if n == 0 {
            return Err(StrategyError::InvalidConfig("n must be at least 1".into()));
        }
        Ok(BasicLocalDetector { n, step: 1, first_click: None })
    }
}

impl Detector for BasicLocalDetector {
    fn n(&self) -> usize {
        self.n
    }

    fn step(&self) -> usize {
        self.step
    }

    fn measurement(&self) -> Result<BinaryMeasurement, StrategyError> {
        if self.step > self.n {
            return Err(StrategyError::Finished(self.n));
        }
        Ok(BinaryMeasurement::COMPUTATIONAL)
    }

    fn observe(&mut self, outcome: bool) -> Result<(), StrategyError> {
        if self.step > self.n {
            return Err(StrategyError::Finished(self.n));
        }
        if outcome && self.first_click.is_none() {
            self.first_click = Some(self.step);
        }
        self.step += 1;
        Ok(())
    }

    fn discard(&mut self) {
        self.step += 1;
    }

    /// First "1" outcome; with no click at all the change must be at `n`.
    fn guess(&self) -> usize {
        self.first_click.unwrap_or(self.n)
    }
}

/// Adaptive Helstrom-basis detector driven by Bayes' rule.
#[derive(Debug, Clone)]
pub struct BayesianDetector {
    c_squared: f64,
    mutated: QubitState,
    prior: PriorVector,
}

impl BayesianDetector {
    pub fn new(n: usize, c_squared: f64) -> Result<Self, StrategyError> {
        if n == 0 {
            return Err(StrategyError::InvalidConfig("n must be at least 1".into()));
        }
        Ok(BayesianDetector {
            c_squared,
            mutated: make_mutated_state(c_squared)?,
            prior: PriorVector::uniform(n),
        })
    }
}

impl Detector for BayesianDetector {
    fn n(&self) -> usize {
        self.prior.n()
    }

    fn step(&self) -> usize {
        self.prior.step
    }

    fn measurement(&self) -> Result<BinaryMeasurement, StrategyError> {
        if self.prior.step > self.prior.n() {
            return Err(StrategyError::Finished(self.prior.n()));
        }
        let (p_h, p_phi) = bi_hypothesis_weights(&self.prior);
        Ok(helstrom_measurement(p_h, p_phi, self.c_squared)?)
    }

    fn observe(&mut self, outcome: bool) -> Result<(), StrategyError> {
        let meas = self.measurement()?;
        self.prior = bayes_step(&self.prior, outcome, &meas, &self.mutated)?;
        Ok(())
    }

    fn discard(&mut self) {
        self.prior.step += 1;
    }

    fn guess(&self) -> usize {
        guess_from_prior(&self.prior)
    }

    fn prior(&self) -> Option<&PriorVector> {
        Some(&self.prior)
    }
}

/// Symmetric outcome-flip noise: each outcome is reported flipped with
/// probability `epsilon`.
pub fn apply_outcome_noise(p0: f64, p1: f64, epsilon: f64) -> (f64, f64) {
    ((1.0 - epsilon) * p0 + epsilon * p1, (1.0 - epsilon) * p1 + epsilon * p0)
}

/// Samples the "1" outcome for photon `s` of the source under `meas`.
pub fn sample_outcome<R: Rng + ?Sized>(
    source: &SourceConfig,
    s: usize,
    meas: &BinaryMeasurement,
    epsilon: f64,
    rng: &mut R,
) -> bool {
    let (p0, p1) = outcome_probabilities(&source.true_state(s), meas);
    let (_, p1) = apply_outcome_noise(p0, p1, epsilon);
    rng.random::<f64>() < p1
}

/// One complete detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub config: SourceConfig,
    pub strategy: Strategy,
    pub outcomes: Vec<bool>,
    pub bases: Vec<BinaryMeasurement>,
    /// `n + 1` snapshots from the uniform start to the final posterior (BI only).
    pub prior_history: Vec<PriorVector>,
    pub guess: usize,
    pub success: bool,
    pub seed: Option<u64>,
}

/// What to do with an outcome every hypothesis assigns zero probability.
/// Only reachable when outcomes do not come from the agent's own model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpossibleOutcomePolicy {
    Fail,
    Discard,
}

/// Drives a detector through all `n` photons, pulling outcomes from
/// `next_outcome(step, basis)`.
pub fn drive<F, E>(
    strategy: Strategy,
    config: &SourceConfig,
    policy: ImpossibleOutcomePolicy,
    mut next_outcome: F,
) -> Result<TrialRecord, E>
where
    F: FnMut(usize, &BinaryMeasurement) -> Result<bool, E>,
    E: From<StrategyError>,
{
    let mut detector = strategy.detector(config.n, config.c_squared)?;
    let mut outcomes = Vec::with_capacity(config.n);
    let mut bases = Vec::with_capacity(config.n);
    let mut prior_history = Vec::new();
    if let Some(p) = detector.prior() {
        prior_history.reserve(config.n + 1);
        prior_history.push(p.clone());
    }
    for s in 1..=config.n {
        let meas = detector.measurement()?;
        let outcome = next_outcome(s, &meas)?;
        match detector.observe(outcome) {
            Ok(()) => {}
            Err(StrategyError::ImpossibleOutcome { .. }) if policy == ImpossibleOutcomePolicy::Discard => {
                detector.discard()
            }
            Err(e) => return Err(e.into()),
        }
        outcomes.push(outcome);
        bases.push(meas);
        if let Some(p) = detector.prior() {
            prior_history.push(p.clone());
        }
    }
    let guess = detector.guess();
    Ok(TrialRecord {
        config: *config,
        strategy,
        outcomes,
        bases,
        prior_history,
        guess,
        success: guess == config.k,
        seed: None,
    })
}

/// Simulates one run with outcomes sampled from the true source states,
/// optionally flipped with probability `epsilon`.
pub fn run_trial<R: Rng + ?Sized>(
    strategy: Strategy,
    config: &SourceConfig,
    epsilon: f64,
    rng: &mut R,
) -> Result<TrialRecord, StrategyError> {
    let policy = if epsilon > 0.0 { ImpossibleOutcomePolicy::Discard } else { ImpossibleOutcomePolicy::Fail };
    drive(strategy, config, policy, |s, meas| {
        Ok::<_, StrategyError>(sample_outcome(config, s, meas, epsilon, rng))
    })
}

/// Simulates one noiseless BI run.
pub fn bi_run<R: Rng + ?Sized>(config: &SourceConfig, rng: &mut R) -> Result<TrialRecord, StrategyError> {
    run_trial(Strategy::BayesianInference, config, 0.0, rng)
}

/// Simulates one noiseless BL run.
pub fn bl_run<R: Rng + ?Sized>(config: &SourceConfig, rng: &mut R) -> Result<TrialRecord, StrategyError> {
    run_trial(Strategy::BasicLocal, config, 0.0, rng)
}

/// Re-runs a detector on a recorded outcome sequence.
pub fn replay(
    strategy: Strategy,
    config: &SourceConfig,
    outcomes: &[bool],
) -> Result<TrialRecord, StrategyError> {
    if outcomes.len() != config.n {
        return Err(StrategyError::OutcomeCount { expected: config.n, got: outcomes.len() });
    }
    drive(strategy, config, ImpossibleOutcomePolicy::Fail, |s, _| Ok::<_, StrategyError>(outcomes[s - 1]))
}

/// Only the final guess of a simulated run, without building a record.
pub fn sample_guess<R: Rng + ?Sized>(
    strategy: Strategy,
    config: &SourceConfig,
    epsilon: f64,
    rng: &mut R,
) -> Result<usize, StrategyError> {
    let mut detector: Box<dyn Detector> = strategy.detector(config.n, config.c_squared)?;
    for s in 1..=config.n {
        let meas = detector.measurement()?;
        let outcome = sample_outcome(config, s, &meas, epsilon, rng);
        match detector.observe(outcome) {
            Ok(()) => {}
            Err(StrategyError::ImpossibleOutcome { .. }) if epsilon > 0.0 => detector.discard(),
            Err(e) => return Err(e),
        }
    }
    Ok(detector.guess())
}

/// BL success probability averaged over a uniformly random change point:
/// `1 − c² + c²/n`.
pub fn bl_success_closed_form(n: usize, c_squared: f64) -> f64 {
    1.0 - c_squared + c_squared / n as f64
}

/// Success probability of the square-root measurement on the `n` equiprobable
/// source states, `(1/n) Σ_k [(√G)_kk]²` with Gram matrix `G_kl = c^|k−l|`.
pub fn srm_optimal_probability(n: usize, c_squared: f64) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    let c = c_squared.clamp(0.0, 1.0).sqrt();
    let gram = DMatrix::from_fn(n, n, |i, j| c.powi(i.abs_diff(j) as i32));
    let eigen = gram.symmetric_eigen();
    // G is PSD; eigenvalues below the round-off floor are zero.
    let floor = 1e-12 * eigen.eigenvalues.max().max(1.0);
    let roots: Vec<f64> = eigen.eigenvalues.iter().map(|&v| if v < floor { 0.0 } else { v.sqrt() }).collect();
    let total: f64 = (0..n)
        .map(|row| {
            let diag: f64 =
                roots.iter().enumerate().map(|(j, r)| r * eigen.eigenvectors[(row, j)].powi(2)).sum();
            diag * diag
        })
        .sum();
    (total / n as f64).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::Operator2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn config_validation() {
        assert!(SourceConfig::new(0, 1, 0.5).is_err());
        assert!(SourceConfig::new(5, 0, 0.5).is_err());
        assert!(SourceConfig::new(5, 6, 0.5).is_err());
        assert!(SourceConfig::new(5, 3, 1.1).is_err());
        let cfg = SourceConfig::new(5, 3, 0.5).unwrap();
        assert_eq!(cfg.true_state(2), QubitState::H);
        assert_eq!(cfg.true_state(3), cfg.mutated_state());
    }

    #[test]
    fn weights_uniform_start() {
        let prior = PriorVector::uniform(20);
        assert_eq!(bi_hypothesis_weights(&prior), (0.05, 0.05));
    }

    #[test]
    fn weights_last_step() {
        let prior = PriorVector { eta: vec![0.1, 0.5, 0.15, 0.25], step: 4 };
        assert_eq!(bi_hypothesis_weights(&prior), (0.0, 0.5));
    }

    #[test]
    fn weights_index_ranges() {
        let prior = PriorVector { eta: vec![0.1, 0.2, 0.3, 0.4], step: 2 };
        let (p_h, p_phi) = bi_hypothesis_weights(&prior);
        // Brute force over the two index ranges.
        let oracle_h = (3..=4).map(|k| prior.get(k)).fold(f64::MIN, f64::max);
        let oracle_phi = (1..=2).map(|k| prior.get(k)).fold(f64::MIN, f64::max);
        assert_eq!((p_h, p_phi), (oracle_h, oracle_phi));
        assert_eq!((p_h, p_phi), (0.4, 0.2));
    }

    #[test]
    fn likelihood_examples() {
        let comp = BinaryMeasurement::COMPUTATIONAL;
        assert_eq!(bi_likelihood(5, 3, true, &comp, 0.3).unwrap(), 0.0);
        assert_eq!(bi_likelihood(2, 3, true, &comp, 0.0).unwrap(), 1.0);
        assert!(close(bi_likelihood(3, 3, false, &comp, 0.604).unwrap(), 0.604, 1e-15));
    }

    #[test]
    fn update_with_flat_likelihood_is_identity() {
        let prior = PriorVector { eta: vec![0.1, 0.2, 0.3, 0.4], step: 2 };
        let all_zero = BinaryMeasurement { pi_0: Operator2::IDENTITY, pi_1: Operator2::ZERO };
        let post = bi_update(&prior, false, &all_zero, 0.3).unwrap();
        for (a, b) in post.eta.iter().zip(&prior.eta) {
            assert!(close(*a, *b, 1e-15));
        }
        assert_eq!(post.step, 3);
    }

    #[test]
    fn update_orthogonal_click_excludes_future() {
        let n = 6;
        let mut prior = PriorVector::uniform(n);
        prior.step = 4;
        let post = bi_update(&prior, true, &BinaryMeasurement::COMPUTATIONAL, 0.0).unwrap();
        for k in 1..=n {
            let expected = if k <= 4 { 0.25 } else { 0.0 };
            assert!(close(post.get(k), expected, 1e-15), "k={k}");
        }
    }

    #[test]
    fn update_one_step_hand_computed() {
        // n = 3, c² = 0.5, step 1, uniform prior: p_H = p_φ = 1/3.
        // Outcome 0 on the Helstrom basis: p(0|H) = ½(1 + √½), p(0|φ) = ½(1 − √½).
        let prior = PriorVector::uniform(3);
        let (p_h, p_phi) = bi_hypothesis_weights(&prior);
        let meas = helstrom_measurement(p_h, p_phi, 0.5).unwrap();
        let post = bi_update(&prior, false, &meas, 0.5).unwrap();
        let a = 0.5 * (1.0 - 0.5f64.sqrt());
        let b = 0.5 * (1.0 + 0.5f64.sqrt());
        let z = a + 2.0 * b;
        let expected = [a / z, b / z, b / z];
        for (got, want) in post.eta.iter().zip(expected) {
            assert!(close(*got, want, 1e-12), "{got} vs {want}");
        }
        assert_eq!(post.step, 2);
    }

    #[test]
    fn update_rejects_impossible_outcome() {
        let mut prior = PriorVector { eta: vec![0.0, 0.0, 1.0], step: 1 };
        // Only k = 3 is live, so photon 1 is |H⟩ and never clicks "1".
        let err = bi_update(&prior, true, &BinaryMeasurement::COMPUTATIONAL, 0.3).unwrap_err();
        assert_eq!(err, StrategyError::ImpossibleOutcome { step: 1, outcome: 1 });
        prior.step = 3;
        assert!(bi_update(&prior, true, &BinaryMeasurement::COMPUTATIONAL, 0.3).is_ok());
    }

    #[test]
    fn guess_tie_break_and_peak() {
        assert_eq!(guess_from_prior(&PriorVector { eta: vec![0.1, 0.7, 0.2], step: 4 }), 2);
        assert_eq!(guess_from_prior(&PriorVector::uniform(4)), 1);
        let mut eta = vec![(1.0 - 0.569) / 19.0; 20];
        eta[4] = 0.569;
        assert_eq!(guess_from_prior(&PriorVector { eta, step: 21 }), 5);
    }

    #[test]
    fn bi_orthogonal_always_succeeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 1..=12 {
            let cfg = SourceConfig::new(12, k, 0.0).unwrap();
            for _ in 0..20 {
                let rec = bi_run(&cfg, &mut rng).unwrap();
                assert!(rec.success, "k={k} outcomes={:?}", rec.outcomes);
                let last = rec.prior_history.last().unwrap();
                assert!(close(last.get(k), 1.0, 1e-12));
            }
        }
    }

    #[test]
    fn bi_identical_states_never_learn() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = SourceConfig::new(7, 4, 1.0).unwrap();
        let rec = bi_run(&cfg, &mut rng).unwrap();
        assert_eq!(rec.guess, 1);
        assert_eq!(rec.prior_history.len(), 8);
        for p in &rec.prior_history {
            for e in &p.eta {
                assert!(close(*e, 1.0 / 7.0, 1e-15));
            }
        }
    }

    #[test]
    fn bi_record_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = SourceConfig::new(20, 5, 0.604).unwrap();
        let rec = bi_run(&cfg, &mut rng).unwrap();
        assert_eq!(rec.outcomes.len(), 20);
        assert_eq!(rec.bases.len(), 20);
        assert_eq!(rec.prior_history.len(), 21);
        assert_eq!(rec.prior_history[0], PriorVector::uniform(20));
        assert_eq!(rec.prior_history[20].step, 21);
        assert_eq!(rec.success, rec.guess == 5);
        // The last basis always has p_H = 0: outcome 1 projects on |φ⟩.
        let phi = cfg.mutated_state();
        assert!(rec.bases[19].pi_1.max_abs_diff(&phi.projector()) < 1e-12);
    }

    #[test]
    fn replay_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let cfg = SourceConfig::new(15, 9, 0.4).unwrap();
        let rec = bi_run(&cfg, &mut rng).unwrap();
        let again = replay(Strategy::BayesianInference, &cfg, &rec.outcomes).unwrap();
        assert_eq!(rec, again);
        assert!(replay(Strategy::BayesianInference, &cfg, &rec.outcomes[1..]).is_err());
    }

    #[test]
    fn bl_first_click_rule() {
        let cfg = SourceConfig::new(8, 3, 0.5).unwrap();
        let mut outcomes = vec![false; 8];
        outcomes[2] = true;
        outcomes[6] = true;
        assert_eq!(replay(Strategy::BasicLocal, &cfg, &outcomes).unwrap().guess, 3);
        let none = replay(Strategy::BasicLocal, &cfg, &[false; 8]).unwrap();
        assert_eq!(none.guess, 8);
        assert!(none.prior_history.is_empty());
    }

    #[test]
    fn bl_orthogonal_always_succeeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..=10 {
            let cfg = SourceConfig::new(10, k, 0.0).unwrap();
            assert!(bl_run(&cfg, &mut rng).unwrap().success);
        }
    }

    /// Exact probability that BL with a fixed no-click guess `g` succeeds,
    /// enumerating all 2ⁿ outcome strings.
    fn enumerate_bl(n: usize, c2: f64, no_click_guess: usize) -> f64 {
        let mut total = 0.0;
        for k in 1..=n {
            for mask in 0u32..(1 << n) {
                let mut prob = 1.0;
                for s in 1..=n {
                    let click = mask >> (s - 1) & 1 == 1;
                    let p1 = if s < k { 0.0 } else { 1.0 - c2 };
                    prob *= if click { p1 } else { 1.0 - p1 };
                }
                let guess = (1..=n).find(|s| mask >> (s - 1) & 1 == 1).unwrap_or(no_click_guess);
                if guess == k {
                    total += prob;
                }
            }
        }
        total / n as f64
    }

    #[test]
    fn bl_no_click_rule_is_forced_by_closed_form() {
        for &(n, c2) in &[(4usize, 0.3), (6, 0.604), (8, 0.9)] {
            let closed = bl_success_closed_form(n, c2);
            assert!(close(enumerate_bl(n, c2, n), closed, 1e-12));
            for g in 1..n {
                assert!(!close(enumerate_bl(n, c2, g), closed, 1e-6), "n={n} g={g}");
            }
        }
    }

    #[test]
    fn closed_form_values() {
        assert!(close(bl_success_closed_form(20, 0.010), 0.9905, 1e-12));
        assert_eq!(bl_success_closed_form(7, 0.0), 1.0);
        assert!(close(bl_success_closed_form(20, 0.604), 0.4262, 1e-12));
    }

    #[test]
    fn srm_endpoints_and_two_state_bound() {
        for n in 1..=12 {
            assert!(close(srm_optimal_probability(n, 0.0), 1.0, 1e-10));
            assert!(close(srm_optimal_probability(n, 1.0), 1.0 / n as f64, 1e-10));
        }
        for c2 in [0.05f64, 0.3, 0.604, 0.883] {
            let helstrom = 0.5 * (1.0 + (1.0 - c2).sqrt());
            assert!(close(srm_optimal_probability(2, c2), helstrom, 1e-10));
        }
    }

    #[test]
    fn noise_examples() {
        assert_eq!(apply_outcome_noise(0.3, 0.7, 0.0), (0.3, 0.7));
        assert_eq!(apply_outcome_noise(0.3, 0.7, 0.5), (0.5, 0.5));
        let (a, b) = apply_outcome_noise(1.0, 0.0, 0.004);
        assert!(close(a, 0.996, 1e-15) && close(b, 0.004, 1e-15));
    }

    #[test]
    fn noisy_orthogonal_run_discards_impossible_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cfg = SourceConfig::new(10, 3, 0.0).unwrap();
        for _ in 0..200 {
            let rec = run_trial(Strategy::BayesianInference, &cfg, 0.2, &mut rng).unwrap();
            let last = rec.prior_history.last().unwrap();
            assert!(close(last.eta.iter().sum::<f64>(), 1.0, 1e-12));
        }
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("bi".parse::<Strategy>().unwrap(), Strategy::BayesianInference);
        assert_eq!("BL".parse::<Strategy>().unwrap(), Strategy::BasicLocal);
        assert!("xx".parse::<Strategy>().is_err());
        assert_eq!(serde_json::to_string(&Strategy::BasicLocal).unwrap(), "\"BL\"");
    }
}
