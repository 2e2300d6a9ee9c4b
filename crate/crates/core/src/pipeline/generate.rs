//! Synthetic time-tagged streams with heralded pairs and uniform background.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::quantum::BinaryMeasurement;
use crate::strategies::{sample_outcome, SourceConfig};

use super::{Channel, DetectionEvent, PipelineError, TimingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRates {
    /// Mean heralded pairs per bin. The count is `⌊r⌋` plus one more with
    /// probability `r − ⌊r⌋`, so an integer rate is exact.
    pub pairs_per_bin: f64,
    /// Uncorrelated singles per channel (idler, H, V) per millisecond.
    pub background_per_ms: f64,
}

impl EventRates {
    pub fn clean(pairs_per_bin: f64) -> Self {
        EventRates { pairs_per_bin, background_per_ms: 0.0 }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.pairs_per_bin >= 0.0 && self.pairs_per_bin.is_finite())
            || !(self.background_per_ms >= 0.0 && self.background_per_ms.is_finite())
        {
            return Err(PipelineError::InvalidRates(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedStream {
    pub events: Vec<DetectionEvent>,
    /// Per frame, per bin: outcome of the earliest pair, `None` if no pair.
    pub planted: Vec<Vec<Option<bool>>>,
}

fn push_background<R: Rng + ?Sized>(
    out: &mut Vec<DetectionEvent>,
    start: u64,
    end: u64,
    per_ms: f64,
    rng: &mut R,
) {
    if per_ms <= 0.0 || end <= start {
        return;
    }
    let mean = per_ms * (end - start) as f64 / 1e6;
    let poisson = Poisson::new(mean).expect("positive finite mean");
    for channel in [Channel::Idler, Channel::SignalH, Channel::SignalV] {
        let count = poisson.sample(rng) as u64;
        for _ in 0..count {
            out.push(DetectionEvent::new(channel, rng.random_range(start..end)));
        }
    }
}

/// Events of chopper period `s` (1-based) of the frame opened at
/// `trigger`, measured in `meas`. Returns the unsorted events and the
/// outcome of the earliest pair.
#[allow(clippy::too_many_arguments)]
pub fn generate_segment<R: Rng + ?Sized>(
    cfg: &TimingConfig,
    source: &SourceConfig,
    trigger: u64,
    s: usize,
    meas: &BinaryMeasurement,
    rates: &EventRates,
    rng: &mut R,
) -> (Vec<DetectionEvent>, Option<bool>) {
    let w = cfg.coincidence_window;
    let seg_start = trigger + cfg.bin_start(s);
    let mut events = Vec::new();

    let whole = rates.pairs_per_bin.floor();
    let mut n_pairs = whole as usize;
    if rng.random::<f64>() < rates.pairs_per_bin - whole {
        n_pairs += 1;
    }
    // Idler offsets in [T + 1, T + width − (w − 1)] keep every signal
    // (idler + d, d < w) inside the bin. Pairs sit at least 2w apart so
    // no two pairs are mutually coincident.
    let first = seg_start + 1;
    let last = seg_start + cfg.bin_width - (w - 1);
    let mut pairs: Vec<(u64, bool)> = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        for _attempt in 0..64 {
            let idler = rng.random_range(first..=last);
            if pairs.iter().all(|&(t, _)| t.abs_diff(idler) >= 2 * w) {
                let outcome = sample_outcome(source, s, meas, 0.0, rng);
                let delay = rng.random_range(0..w);
                let channel = if outcome { Channel::SignalV } else { Channel::SignalH };
                events.push(DetectionEvent::new(Channel::Idler, idler));
                events.push(DetectionEvent::new(channel, idler + delay));
                pairs.push((idler, outcome));
                break;
            }
        }
    }
    push_background(&mut events, seg_start, seg_start + cfg.chopper_period, rates.background_per_ms, rng);
    let planted = pairs.iter().min_by_key(|&&(t, _)| t).map(|&(_, o)| o);
    (events, planted)
}

pub(crate) fn sort_events(events: &mut [DetectionEvent]) {
    events.sort_by_key(|e| (e.timestamp, e.channel));
}

/// Generates `frames` trigger frames of `source`, one trigger per
/// `trigger_interval` starting at 0. `basis(frame, s)` picks the
/// measurement applied to photon `s`.
pub fn generate_stream<R, B>(
    cfg: &TimingConfig,
    source: &SourceConfig,
    frames: usize,
    rates: &EventRates,
    mut basis: B,
    rng: &mut R,
) -> Result<GeneratedStream, PipelineError>
where
    R: Rng + ?Sized,
    B: FnMut(usize, usize) -> BinaryMeasurement,
{
    cfg.validate()?;
    rates.validate()?;
    if cfg.n_bins != source.n {
        return Err(PipelineError::InvalidTiming(format!(
            "{} bins for a sequence of {} photons",
            cfg.n_bins, source.n
        )));
    }
    let mut events = Vec::new();
    let mut planted = Vec::with_capacity(frames);
    for frame in 0..frames {
        let trigger = frame as u64 * cfg.trigger_interval;
        events.push(DetectionEvent::new(Channel::Trigger, trigger));
        let mut frame_planted = Vec::with_capacity(cfg.n_bins);
        for s in 1..=cfg.n_bins {
            let meas = basis(frame, s);
            let (seg, p) = generate_segment(cfg, source, trigger, s, &meas, rates, rng);
            events.extend(seg);
            frame_planted.push(p);
        }
        let tail = trigger + cfg.n_bins as u64 * cfg.chopper_period;
        push_background(&mut events, tail, trigger + cfg.trigger_interval, rates.background_per_ms, rng);
        planted.push(frame_planted);
    }
    sort_events(&mut events);
    Ok(GeneratedStream { events, planted })
}
