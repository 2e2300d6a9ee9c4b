//! Quantum change point detection.
//!
//! A source emits `n` photons in the default state `|H⟩` until an unknown
//! position `k`, after which it emits the mutated state
//! `|φ⟩ = c|H⟩ + s|V⟩`. This crate simulates online detectors that locate `k`
//! by measuring photons one at a time:
//!
//! * [`quantum`]: real 2D states, projectors and the Helstrom measurement.
//! * [`strategies`]: the basic-local and Bayesian-inference detectors and the
//!   square-root-measurement bound.
//! * [`experiments`]: Monte Carlo estimates, exact enumeration oracles and
//!   parameter sweeps.
//! * [`pipeline`]: time-tagged detector events, coincidence logic and
//!   time-bin postselection.

pub mod experiments;
pub mod pipeline;
pub mod quantum;
pub mod strategies;

pub use experiments::{ChangePoint, EstimateWithError, ExperimentError, Parallelism, SweepTable};
pub use quantum::{BinaryMeasurement, Operator2, QuantumError, QubitState};
pub use strategies::{PriorVector, SourceConfig, Strategy, StrategyError, TrialRecord};
