//! Detection driven end to end by synthetic event streams.

use rand::Rng;
use rayon::prelude::*;

use crate::experiments::{point_seed, seeding, ChangePoint, EstimateWithError, ExperimentError, Parallelism};
use crate::strategies::{drive, ImpossibleOutcomePolicy, SourceConfig, Strategy, TrialRecord};

use super::generate::{generate_segment, sort_events};
use super::{ChannelIndex, EventRates, PipelineError, TimingConfig};

const STREAM_SALT: u64 = 0x5752_4541_4d00_0000;

/// One trial where each photon's outcome comes from postselecting the events
/// generated for its bin. The detector fixes the basis of bin `s` before
/// that bin's events exist.
///
/// A bin with no effective event aborts the trial with
/// [`PipelineError::EmptyBin`]. Outcomes that every live hypothesis rules out
/// (possible with background) are discarded rather than failing the update.
pub fn run_strategy_on_stream<R: Rng + ?Sized>(
    strategy: Strategy,
    timing: &TimingConfig,
    source: &SourceConfig,
    rates: &EventRates,
    rng: &mut R,
) -> Result<TrialRecord, PipelineError> {
    timing.validate()?;
    rates.validate()?;
    if timing.n_bins != source.n {
        return Err(PipelineError::InvalidTiming(format!(
            "{} bins for a sequence of {} photons",
            timing.n_bins, source.n
        )));
    }
    let trigger = 0;
    let mut index = ChannelIndex::default();
    drive(strategy, source, ImpossibleOutcomePolicy::Discard, |s, meas| {
        let (mut events, _) = generate_segment(timing, source, trigger, s, meas, rates, rng);
        sort_events(&mut events);
        index.extend(&events);
        index.select_bin(trigger, s, timing).outcome.as_outcome().ok_or(PipelineError::EmptyBin { bin: s })
    })
}

/// Success rate of stream-driven trials. Trials aborted by an empty bin are
/// excluded from the mean and reported in `invalid`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_stream_success(
    strategy: Strategy,
    timing: &TimingConfig,
    c_squared: f64,
    k: ChangePoint,
    trials: usize,
    rates: &EventRates,
    master_seed: u64,
    par: &Parallelism,
) -> Result<EstimateWithError, PipelineError> {
    if trials == 0 {
        return Err(ExperimentError::NoTrials.into());
    }
    let n = timing.n_bins;
    let fixed_k = match k {
        ChangePoint::Fixed(k) => Some(k),
        ChangePoint::Averaged => None,
    };
    SourceConfig::new(n, fixed_k.unwrap_or(1), c_squared)?;
    let seed = seeding::derive_seed(point_seed(master_seed, strategy, n, c_squared, k, 0.0), &[STREAM_SALT]);

    let (successes, invalid) = par.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let true_k = fixed_k.unwrap_or(i % n + 1);
                let source = SourceConfig { n, k: true_k, c_squared };
                let mut rng = seeding::rng_from_seed(seeding::trial_seed(seed, i as u64));
                match run_strategy_on_stream(strategy, timing, &source, rates, &mut rng) {
                    Ok(rec) => Ok((rec.success as usize, 0)),
                    Err(PipelineError::EmptyBin { .. }) => Ok((0, 1)),
                    Err(e) => Err(e),
                }
            })
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
    })?;

    Ok(EstimateWithError::from_counts(
        strategy,
        (n, c_squared, fixed_k),
        0.0,
        successes,
        trials - invalid,
        invalid,
        seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_clean_stream_always_succeeds() {
        let timing = TimingConfig::with_bins(10);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for strategy in [Strategy::BasicLocal, Strategy::BayesianInference] {
            for k in 1..=10 {
                let source = SourceConfig::new(10, k, 0.0).unwrap();
                let rec =
                    run_strategy_on_stream(strategy, &timing, &source, &EventRates::clean(1.0), &mut rng)
                        .unwrap();
                assert!(rec.success);
                assert_eq!(rec.guess, k);
            }
        }
    }

    #[test]
    fn missing_pairs_invalidate_the_trial() {
        let timing = TimingConfig::with_bins(6);
        let source = SourceConfig::new(6, 3, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let err = run_strategy_on_stream(
            Strategy::BayesianInference,
            &timing,
            &source,
            &EventRates::clean(0.0),
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(err, PipelineError::EmptyBin { bin: 1 }));

        let par = Parallelism::sequential();
        let est = simulate_stream_success(
            Strategy::BasicLocal,
            &timing,
            0.4,
            ChangePoint::Averaged,
            200,
            &EventRates::clean(0.5),
            1,
            &par,
        )
        .unwrap();
        assert!(est.invalid > 150, "{est:?}");
        assert_eq!(est.trials + est.invalid, 200);
    }

    #[test]
    fn stream_replays_its_own_outcomes() {
        use crate::strategies::replay;
        let timing = TimingConfig::with_bins(12);
        let source = SourceConfig::new(12, 4, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rec = run_strategy_on_stream(
            Strategy::BayesianInference,
            &timing,
            &source,
            &EventRates::clean(1.0),
            &mut rng,
        )
        .unwrap();
        assert_eq!(replay(Strategy::BayesianInference, &source, &rec.outcomes).unwrap(), rec);
    }
}
