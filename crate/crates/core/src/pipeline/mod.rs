//! Detector-event processing: coincidences, effective events and
//! trigger-synchronized time-bin postselection.
//!
//! A trigger opens a frame. Photon `s` of the sequence is the first effective
//! signal event whose trigger-relative offset lies in
//! `((s−1)·chopper_period, (s−1)·chopper_period + bin_width]`. A signal event
//! is effective when it is coincident with an idler event that is coincident
//! with exactly one of the two polarization channels.

mod generate;
mod io;
mod run;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::ExperimentError;
use crate::strategies::StrategyError;

pub use generate::{generate_segment, generate_stream, EventRates, GeneratedStream};
pub use io::{read_events, write_bin_outcomes, write_events, EVENT_HEADER, OUTCOME_HEADER};
pub use run::{run_strategy_on_stream, simulate_stream_success};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("line {line}: timestamp {timestamp} precedes the previous event")]
    Unsorted { line: u64, timestamp: u64 },
    #[error("line {line}: unknown channel code '{code}'")]
    UnknownChannel { line: u64, code: String },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("event stream contains no trigger")]
    NoTrigger,
    #[error("invalid timing configuration: {0}")]
    InvalidTiming(String),
    #[error("invalid event rates: {0}")]
    InvalidRates(String),
    #[error("bin {bin} has no effective event")]
    EmptyBin { bin: usize },
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    Trigger,
    Idler,
    SignalH,
    SignalV,
}

impl Channel {
    /// Code used in event files.
    pub fn code(&self) -> &'static str {
        match self {
            Channel::Trigger => "TRIG",
            Channel::Idler => "IDLER",
            Channel::SignalH => "H",
            Channel::SignalV => "V",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "TRIG" => Some(Channel::Trigger),
            "IDLER" => Some(Channel::Idler),
            "H" => Some(Channel::SignalH),
            "V" => Some(Channel::SignalV),
            _ => None,
        }
    }
}

/// A time-tagged detector click. Timestamps are integer nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub channel: Channel,
    pub timestamp: u64,
}

impl DetectionEvent {
    pub fn new(channel: Channel, timestamp: u64) -> Self {
        DetectionEvent { channel, timestamp }
    }
}

/// Frame and bin timing, all in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub trigger_interval: u64,
    pub chopper_period: u64,
    pub bin_width: u64,
    pub coincidence_window: u64,
    pub n_bins: usize,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            trigger_interval: 100_000_000,
            chopper_period: 5_000_000,
            bin_width: 2_500_000,
            coincidence_window: 3,
            n_bins: 20,
        }
    }
}

impl TimingConfig {
    pub fn with_bins(n_bins: usize) -> Self {
        TimingConfig { n_bins, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidTiming(m));
        if self.n_bins == 0 {
            return bad("n_bins must be at least 1".into());
        }
        if self.coincidence_window == 0 {
            return bad("coincidence window must be positive".into());
        }
        if self.bin_width < self.coincidence_window || self.bin_width > self.chopper_period {
            return bad(format!(
                "bin width {} must lie in [coincidence window {}, chopper period {}]",
                self.bin_width, self.coincidence_window, self.chopper_period
            ));
        }
        match (self.n_bins as u64).checked_mul(self.chopper_period) {
            Some(span) if span <= self.trigger_interval => Ok(()),
            _ => bad(format!(
                "{} bins of {} ns do not fit in a {} ns trigger interval",
                self.n_bins, self.chopper_period, self.trigger_interval
            )),
        }
    }

    /// Offset of the start of bin `s` (1-based) from its trigger.
    pub fn bin_start(&self, s: usize) -> u64 {
        (s as u64 - 1) * self.chopper_period
    }
}

/// Result of one postselected time bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinResult {
    Zero,
    One,
    Empty,
}

impl BinResult {
    pub fn as_outcome(&self) -> Option<bool> {
        match self {
            BinResult::Zero => Some(false),
            BinResult::One => Some(true),
            BinResult::Empty => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BinResult::Zero => "0",
            BinResult::One => "1",
            BinResult::Empty => "empty",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinOutcome {
    /// 1-based bin index.
    pub bin: usize,
    pub outcome: BinResult,
    /// Absolute timestamp of the selected signal event; `None` iff empty.
    pub selected_timestamp: Option<u64>,
}

/// Postselected bins of one trigger frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerFrame {
    pub trigger_timestamp: u64,
    pub bins: Vec<BinOutcome>,
}

impl TriggerFrame {
    pub fn outcomes(&self) -> Vec<Option<bool>> {
        self.bins.iter().map(|b| b.outcome.as_outcome()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Effective {
    OutcomeZero,
    OutcomeOne,
    NotEffective,
}

/// Strict coincidence: `|t1 − t2| < window`.
pub fn coincident(t1: u64, t2: u64, window: u64) -> bool {
    t1.abs_diff(t2) < window
}

/// Index range of `sorted` coincident with `t`.
fn coincident_range(sorted: &[u64], t: u64, window: u64) -> std::ops::Range<usize> {
    let lo = sorted.partition_point(|&x| x.saturating_add(window) <= t);
    let hi = sorted.partition_point(|&x| x < t.saturating_add(window));
    lo..hi.max(lo)
}

fn any_coincident(sorted: &[u64], t: u64, window: u64) -> bool {
    !coincident_range(sorted, t, window).is_empty()
}

/// Classifies an idler click by which polarization channels fire with it.
pub fn classify_effective(idler_t: u64, h_events: &[u64], v_events: &[u64], window: u64) -> Effective {
    match (any_coincident(h_events, idler_t, window), any_coincident(v_events, idler_t, window)) {
        (true, false) => Effective::OutcomeZero,
        (false, true) => Effective::OutcomeOne,
        _ => Effective::NotEffective,
    }
}

/// Per-channel sorted timestamps.
#[derive(Debug, Clone, Default)]
pub(crate) struct ChannelIndex {
    pub triggers: Vec<u64>,
    pub idlers: Vec<u64>,
    pub h: Vec<u64>,
    pub v: Vec<u64>,
    /// H and V events merged in stream order.
    pub signals: Vec<(u64, Channel)>,
}

impl ChannelIndex {
    pub fn extend(&mut self, events: &[DetectionEvent]) {
        for e in events {
            match e.channel {
                Channel::Trigger => self.triggers.push(e.timestamp),
                Channel::Idler => self.idlers.push(e.timestamp),
                Channel::SignalH => {
                    self.h.push(e.timestamp);
                    self.signals.push((e.timestamp, e.channel));
                }
                Channel::SignalV => {
                    self.v.push(e.timestamp);
                    self.signals.push((e.timestamp, e.channel));
                }
            }
        }
    }

    /// First effective signal event of bin `s` in the frame opened at `trigger`.
    pub fn select_bin(&self, trigger: u64, s: usize, cfg: &TimingConfig) -> BinOutcome {
        let lo = trigger + cfg.bin_start(s);
        let hi = lo + cfg.bin_width;
        let start = self.signals.partition_point(|&(t, _)| t <= lo);
        let end = self.signals.partition_point(|&(t, _)| t <= hi);
        let w = cfg.coincidence_window;
        for &(t, channel) in &self.signals[start..end] {
            let wanted = match channel {
                Channel::SignalH => Effective::OutcomeZero,
                _ => Effective::OutcomeOne,
            };
            let heralded = self.idlers[coincident_range(&self.idlers, t, w)]
                .iter()
                .any(|&idler| classify_effective(idler, &self.h, &self.v, w) == wanted);
            if heralded {
                let outcome = match wanted {
                    Effective::OutcomeZero => BinResult::Zero,
                    _ => BinResult::One,
                };
                return BinOutcome { bin: s, outcome, selected_timestamp: Some(t) };
            }
        }
        BinOutcome { bin: s, outcome: BinResult::Empty, selected_timestamp: None }
    }
}

/// Postselects every bin of every trigger frame in a sorted stream.
pub fn postselect_bins(
    stream: &[DetectionEvent],
    cfg: &TimingConfig,
) -> Result<Vec<TriggerFrame>, PipelineError> {
    cfg.validate()?;
    for (i, pair) in stream.windows(2).enumerate() {
        if pair[1].timestamp < pair[0].timestamp {
            // Line numbers as in an event file: header is line 1.
            return Err(PipelineError::Unsorted { line: i as u64 + 3, timestamp: pair[1].timestamp });
        }
    }
    let mut index = ChannelIndex::default();
    index.extend(stream);
    if index.triggers.is_empty() {
        return Err(PipelineError::NoTrigger);
    }
    Ok(index
        .triggers
        .iter()
        .map(|&trigger| TriggerFrame {
            trigger_timestamp: trigger,
            bins: (1..=cfg.n_bins).map(|s| index.select_bin(trigger, s, cfg)).collect(),
        })
        .collect())
}
