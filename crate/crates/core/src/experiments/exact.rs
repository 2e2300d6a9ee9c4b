//! Exact success probabilities by exhaustive enumeration.

use crate::quantum::{outcome_probabilities, QubitState};
use crate::strategies::{BayesianDetector, Detector, SourceConfig};

use super::ExperimentError;

/// Largest sequence length [`exact_bi_success`] will enumerate (2ⁿ paths).
pub const MAX_EXACT_N: usize = 16;

/// Walks the outcome tree once and accumulates, for every true change point,
/// the probability that BI guesses it.
fn accumulate(
    detector: &BayesianDetector,
    path_prob: &[f64],
    h: &QubitState,
    phi: &QubitState,
    success: &mut [f64],
) {
    let n = detector.n();
    let s = detector.step();
    if s > n {
        let g = detector.guess();
        success[g - 1] += path_prob[g - 1];
        return;
    }
    let meas = detector.measurement().expect("step within range");
    let (h0, h1) = outcome_probabilities(h, &meas);
    let (f0, f1) = outcome_probabilities(phi, &meas);
    for (outcome, p_h, p_phi) in [(false, h0, f0), (true, h1, f1)] {
        // Under true change point k, photon s is |H⟩ iff s < k.
        let next: Vec<f64> =
            path_prob.iter().enumerate().map(|(i, p)| p * if s < i + 1 { p_h } else { p_phi }).collect();
        if next.iter().all(|&p| p == 0.0) {
            continue;
        }
        let mut child = detector.clone();
        child.observe(outcome).expect("branch has positive probability");
        accumulate(&child, &next, h, phi, success);
    }
}

/// `P(k̂ = k | true k)` for every `k = 1..n`, noiseless.
pub fn exact_bi_success_all(n: usize, c_squared: f64) -> Result<Vec<f64>, ExperimentError> {
    if n > MAX_EXACT_N {
        return Err(ExperimentError::TooLarge { n, max: MAX_EXACT_N });
    }
    let detector = BayesianDetector::new(n, c_squared)?;
    let phi = SourceConfig::new(n, 1, c_squared)?.mutated_state();
    let mut success = vec![0.0; n];
    accumulate(&detector, &vec![1.0; n], &QubitState::H, &phi, &mut success);
    Ok(success)
}

/// Exact BI success probability for true change point `k`.
pub fn exact_bi_success(n: usize, c_squared: f64, k: usize) -> Result<f64, ExperimentError> {
    SourceConfig::new(n, k, c_squared)?;
    Ok(exact_bi_success_all(n, c_squared)?[k - 1])
}

/// Exact BI success averaged over a uniform change point.
pub fn exact_bi_average(n: usize, c_squared: f64) -> Result<f64, ExperimentError> {
    let all = exact_bi_success_all(n, c_squared)?;
    Ok(all.iter().sum::<f64>() / n as f64)
}

/// Exact BL success for true change point `k`: the first click lands on `k`
/// with probability `1 − c²`, and `k = n` is also guessed with no click.
pub fn exact_bl_success(n: usize, c_squared: f64, k: usize) -> Result<f64, ExperimentError> {
    SourceConfig::new(n, k, c_squared)?;
    Ok(if k == n { 1.0 } else { 1.0 - c_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::bl_success_closed_form;

    #[test]
    fn single_hypothesis() {
        for &c2 in &[0.0, 0.4, 1.0] {
            assert_eq!(exact_bi_success(1, c2, 1).unwrap(), 1.0);
        }
    }

    #[test]
    fn orthogonal_states_are_always_found() {
        for n in 1..=8 {
            for p in exact_bi_success_all(n, 0.0).unwrap() {
                assert!((p - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identical_states_fall_back_to_tie_break() {
        let all = exact_bi_success_all(5, 1.0).unwrap();
        assert_eq!(all, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    /// n = 3, c² = ½, k = 2: expand the 8 outcome paths by hand.
    ///
    /// Step 1 (uniform, p_H = p_φ = ⅓) measures the equal-weight Helstrom
    /// basis; write a = ½(1 − √½), b = ½(1 + √½) so `p(0|H) = b`, `p(0|φ) = a`.
    /// Under k = 2, photon 1 is |H⟩ and photons 2, 3 are |φ⟩.
    #[test]
    fn three_photon_hand_expansion() {
        use crate::quantum::{helstrom_measurement, make_mutated_state, BinaryMeasurement};
        use crate::strategies::{bi_hypothesis_weights, bi_update, guess_from_prior, PriorVector};

        let c2 = 0.5;
        let phi = make_mutated_state(c2).unwrap();
        let mut total = 0.0;
        for mask in 0u32..8 {
            let mut prior = PriorVector::uniform(3);
            let mut prob = 1.0;
            for s in 1..=3 {
                let (p_h, p_phi) = bi_hypothesis_weights(&prior);
                let meas: BinaryMeasurement = helstrom_measurement(p_h, p_phi, c2).unwrap();
                let outcome = mask >> (s - 1) & 1 == 1;
                let state = if s < 2 { QubitState::H } else { phi };
                let p1 = meas.pi_1.expectation(&state);
                prob *= if outcome { p1 } else { 1.0 - p1 };
                match bi_update(&prior, outcome, &meas, c2) {
                    Ok(next) => prior = next,
                    Err(_) => {
                        assert!(prob < 1e-15, "rejected a branch of probability {prob}");
                        prob = 0.0;
                        break;
                    }
                }
            }
            if prob > 0.0 && guess_from_prior(&prior) == 2 {
                total += prob;
            }
        }
        let exact = exact_bi_success(3, c2, 2).unwrap();
        assert!((exact - total).abs() < 1e-12, "{exact} vs {total}");
        assert!(exact > 1.0 / 3.0 && exact < 1.0);
    }

    /// Values from an independent numpy enumeration (dense `eigh` Helstrom
    /// projectors, explicit per-path likelihood products).
    #[test]
    fn frozen_small_cases() {
        let cases: [(usize, &[f64]); 2] = [
            (3, &[0.8474071914746786, 0.7285533905932741, 0.8141589010108151]),
            (4, &[0.8463193467761475, 0.7233072814963354, 0.694928090439475, 0.8005960031954841]),
        ];
        for (n, expected) in cases {
            let got = exact_bi_success_all(n, 0.5).unwrap();
            for (g, e) in got.iter().zip(expected) {
                assert!((g - e).abs() < 1e-12, "n={n}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn bl_average_matches_closed_form() {
        for n in 1..=25 {
            for i in 0..=10 {
                let c2 = i as f64 / 10.0;
                let avg: f64 = (1..=n).map(|k| exact_bl_success(n, c2, k).unwrap()).sum::<f64>() / n as f64;
                assert!((avg - bl_success_closed_form(n, c2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bl_examples() {
        assert!((exact_bl_success(20, 0.604, 5).unwrap() - 0.396).abs() < 1e-15);
        assert_eq!(exact_bl_success(20, 0.3, 20).unwrap(), 1.0);
    }

    #[test]
    fn rejects_large_n() {
        assert!(matches!(exact_bi_success_all(MAX_EXACT_N + 1, 0.5), Err(ExperimentError::TooLarge { .. })));
    }
}
