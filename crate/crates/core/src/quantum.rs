//! Real two-dimensional linear algebra for polarization qubits.
//!
//! Every state in the protocol lives in the real span of `|H⟩` and `|V⟩`, so
//! states are stored as real amplitude pairs and operators as symmetric 2×2
//! real matrices. The Helstrom measurement is built from a closed-form
//! eigendecomposition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used to decide whether an eigenvalue of the Helstrom matrix is
/// zero, relative to the largest eigenvalue magnitude.
const ZERO_EIGENVALUE_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("overlap c^2 = {0} is outside [0, 1]")]
    Domain(f64),
    #[error("hypothesis weights p_h = {p_h}, p_phi = {p_phi} do not define a measurement")]
    DegenerateWeights { p_h: f64, p_phi: f64 },
}

/// A pure polarization state with real amplitudes on `|H⟩` and `|V⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub amp_h: f64,
    pub amp_v: f64,
}

impl QubitState {
    /// The default state `|H⟩`.
    pub const H: QubitState = QubitState { amp_h: 1.0, amp_v: 0.0 };
    /// The orthogonal state `|V⟩`.
    pub const V: QubitState = QubitState { amp_h: 0.0, amp_v: 1.0 };

    /// Builds a state from amplitudes, normalizing them. Returns `None` for the
    /// zero vector.
    pub fn normalized(amp_h: f64, amp_v: f64) -> Option<Self> {
        let norm = amp_h.hypot(amp_v);
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        Some(QubitState { amp_h: amp_h / norm, amp_v: amp_v / norm })
    }

    pub fn norm_squared(&self) -> f64 {
        self.amp_h * self.amp_h + self.amp_v * self.amp_v
    }

    pub fn inner(&self, other: &QubitState) -> f64 {
        self.amp_h * other.amp_h + self.amp_v * other.amp_v
    }

    /// The state orthogonal to this one, rotated by +90°.
    pub fn orthogonal(&self) -> QubitState {
        QubitState { amp_h: -self.amp_v, amp_v: self.amp_h }
    }

    /// The rank-one projector `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> Operator2 {
        Operator2 { m00: self.amp_h * self.amp_h, m01: self.amp_h * self.amp_v, m11: self.amp_v * self.amp_v }
    }
}

/// The mutated state `|φ⟩ = c|H⟩ + s|V⟩` with `c = √c²` and `s = √(1 − c²)`.
pub fn make_mutated_state(c_squared: f64) -> Result<QubitState, QuantumError> {
    if !(0.0..=1.0).contains(&c_squared) {
        return Err(QuantumError::Domain(c_squared));
    }
    Ok(QubitState { amp_h: c_squared.sqrt(), amp_v: (1.0 - c_squared).sqrt() })
}

/// Symmetric real 2×2 matrix; the off-diagonal entry is stored once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Operator2 {
    pub m00: f64,
    pub m01: f64,
    pub m11: f64,
}

impl Operator2 {
    pub const ZERO: Operator2 = Operator2 { m00: 0.0, m01: 0.0, m11: 0.0 };
    pub const IDENTITY: Operator2 = Operator2 { m00: 1.0, m01: 0.0, m11: 1.0 };

    pub fn new(m00: f64, m01: f64, m11: f64) -> Self {
        Operator2 { m00, m01, m11 }
    }

    pub fn trace(&self) -> f64 {
        self.m00 + self.m11
    }

    pub fn scale(&self, factor: f64) -> Operator2 {
        Operator2 { m00: self.m00 * factor, m01: self.m01 * factor, m11: self.m11 * factor }
    }

    pub fn add(&self, other: &Operator2) -> Operator2 {
        Operator2 { m00: self.m00 + other.m00, m01: self.m01 + other.m01, m11: self.m11 + other.m11 }
    }

    pub fn sub(&self, other: &Operator2) -> Operator2 {
        self.add(&other.scale(-1.0))
    }

    /// Matrix product. The product of two symmetric matrices is symmetric only
    /// when they commute, so this is used for `P·P` style identities.
    pub fn square(&self) -> Operator2 {
        Operator2 {
            m00: self.m00 * self.m00 + self.m01 * self.m01,
            m01: self.m01 * (self.m00 + self.m11),
            m11: self.m01 * self.m01 + self.m11 * self.m11,
        }
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, state: &QubitState) -> f64 {
        let (h, v) = (state.amp_h, state.amp_v);
        self.m00 * h * h + 2.0 * self.m01 * h * v + self.m11 * v * v
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        (self.m00 - other.m00).abs().max((self.m01 - other.m01).abs()).max((self.m11 - other.m11).abs())
    }
}

/// One eigenpair of a symmetric 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: QubitState,
}

fn sign_normalize(v: QubitState) -> QubitState {
    if v.amp_h < 0.0 || (v.amp_h == 0.0 && v.amp_v < 0.0) {
        QubitState { amp_h: -v.amp_h, amp_v: -v.amp_v }
    } else {
        v
    }
}

/// Closed-form eigendecomposition, eigenvalues in descending order.
///
/// Eigenvectors are orthonormal by construction (a rotation by the angle
/// `½·atan2(2b, a − d)`) and each is sign-fixed so its first nonzero component
/// is positive.
pub fn eigen_sym2(op: &Operator2) -> [EigenPair; 2] {
    let mean = 0.5 * (op.m00 + op.m11);
    let half_diff = 0.5 * (op.m00 - op.m11);
    let radius = half_diff.hypot(op.m01);
    let theta = 0.5 * (2.0 * op.m01).atan2(op.m00 - op.m11);
    let (sin, cos) = theta.sin_cos();
    let upper = QubitState { amp_h: cos, amp_v: sin };
    [
        EigenPair { value: mean + radius, vector: sign_normalize(upper) },
        EigenPair { value: mean - radius, vector: sign_normalize(upper.orthogonal()) },
    ]
}

/// A two-outcome projective measurement `{Π₀, Π₁}`.
///
/// Outcome `0` is the "default state detected" result (`Π_s(H)`) and outcome
/// `1` the "mutated state detected" result (`Π_s(φ)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMeasurement {
    pub pi_0: Operator2,
    pub pi_1: Operator2,
}

impl BinaryMeasurement {
    /// The fixed `{|H⟩⟨H|, |V⟩⟨V|}` basis.
    pub const COMPUTATIONAL: BinaryMeasurement = BinaryMeasurement {
        pi_0: Operator2 { m00: 1.0, m01: 0.0, m11: 0.0 },
        pi_1: Operator2 { m00: 0.0, m01: 0.0, m11: 1.0 },
    };

    /// The measurement `{|ψ⟩⟨ψ|, |ψ⊥⟩⟨ψ⊥|}` with outcome 0 on `ψ`.
    pub fn from_zero_state(state: &QubitState) -> Self {
        BinaryMeasurement { pi_0: state.projector(), pi_1: state.orthogonal().projector() }
    }

    pub fn projector(&self, outcome: bool) -> &Operator2 {
        if outcome {
            &self.pi_1
        } else {
            &self.pi_0
        }
    }

    /// Rank of `Π₀` (0, 1 or 2).
    pub fn rank_zero(&self) -> usize {
        self.pi_0.trace().round() as usize
    }

    /// Polarization angle (radians, in `(-π/2, π/2]`) of the state that yields
    /// outcome 0 with certainty, when `Π₀` has rank one. This is the
    /// half-wave-plate setting that realizes the basis.
    pub fn zero_angle(&self) -> Option<f64> {
        if self.rank_zero() != 1 {
            return None;
        }
        let top = eigen_sym2(&self.pi_0)[0].vector;
        let mut angle = top.amp_v.atan2(top.amp_h);
        if angle <= -std::f64::consts::FRAC_PI_2 {
            angle += std::f64::consts::PI;
        }
        Some(angle)
    }
}

/// The Helstrom matrix `Γ = p_h|H⟩⟨H| − p_φ|φ⟩⟨φ|`.
pub fn helstrom_matrix(p_h: f64, p_phi: f64, c_squared: f64) -> Result<Operator2, QuantumError> {
    let phi = make_mutated_state(c_squared)?;
    Ok(QubitState::H.projector().scale(p_h).sub(&phi.projector().scale(p_phi)))
}

/// Projectors onto the non-negative (`Π₀`) and negative (`Π₁`) parts of the
/// spectrum of the Helstrom matrix.
///
/// An eigenvalue within `1e-12` (relative) of zero counts as non-negative, so
/// a zero eigenvalue always lands in `Π₀`.
pub fn helstrom_measurement(p_h: f64, p_phi: f64, c_squared: f64) -> Result<BinaryMeasurement, QuantumError> {
    if !(p_h >= 0.0 && p_phi >= 0.0 && p_h + p_phi > 0.0) || !(p_h + p_phi).is_finite() {
        return Err(QuantumError::DegenerateWeights { p_h, p_phi });
    }
    let gamma = helstrom_matrix(p_h, p_phi, c_squared)?;
    let pairs = eigen_sym2(&gamma);
    let scale = pairs[0].value.abs().max(pairs[1].value.abs());
    let threshold = -ZERO_EIGENVALUE_RTOL * scale;

    let mut pi_0 = Operator2::ZERO;
    let mut pi_1 = Operator2::ZERO;
    for pair in &pairs {
        let proj = pair.vector.projector();
        if pair.value >= threshold {
            pi_0 = pi_0.add(&proj);
        } else {
            pi_1 = pi_1.add(&proj);
        }
    }
    Ok(BinaryMeasurement { pi_0, pi_1 })
}

/// Born-rule probabilities `(⟨ψ|Π₀|ψ⟩, ⟨ψ|Π₁|ψ⟩)`, clamped to `[0, 1]`.
pub fn outcome_probabilities(state: &QubitState, meas: &BinaryMeasurement) -> (f64, f64) {
    let p0 = meas.pi_0.expectation(state).clamp(0.0, 1.0);
    let p1 = meas.pi_1.expectation(state).clamp(0.0, 1.0);
    (p0, p1)
}
