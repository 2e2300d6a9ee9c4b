//! Event and bin-outcome CSV files.
//!
//! Event files have the header `channel,timestamp_ns`, one event per line,
//! channel in `{TRIG, IDLER, H, V}`, timestamps in non-decreasing order.

use std::io::{Read, Write};

use super::{Channel, DetectionEvent, PipelineError, TriggerFrame};

pub const EVENT_HEADER: [&str; 2] = ["channel", "timestamp_ns"];
pub const OUTCOME_HEADER: [&str; 4] = ["trigger_ns", "bin", "outcome", "timestamp_ns"];

/// Reads an event file, rejecting it at the first malformed or out-of-order
/// line.
pub fn read_events<R: Read>(input: R) -> Result<Vec<DetectionEvent>, PipelineError> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(input);
    let mut records = reader.records();
    match records.next() {
        Some(Ok(h)) if h.iter().eq(EVENT_HEADER) => {}
        Some(Ok(h)) => {
            return Err(PipelineError::Parse {
                line: 1,
                message: format!(
                    "expected header 'channel,timestamp_ns', found '{}'",
                    h.iter().collect::<Vec<_>>().join(",")
                ),
            })
        }
        Some(Err(e)) => return Err(e.into()),
        None => return Err(PipelineError::Parse { line: 1, message: "empty file".into() }),
    }

    let mut events = Vec::new();
    let mut last = 0u64;
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(PipelineError::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let channel = Channel::from_code(&record[0])
            .ok_or_else(|| PipelineError::UnknownChannel { line, code: record[0].to_string() })?;
        let timestamp: u64 = record[1].parse().map_err(|e| PipelineError::Parse {
            line,
            message: format!("bad timestamp '{}': {e}", &record[1]),
        })?;
        if timestamp < last {
            return Err(PipelineError::Unsorted { line, timestamp });
        }
        last = timestamp;
        events.push(DetectionEvent { channel, timestamp });
    }
    Ok(events)
}

pub fn write_events<W: Write>(out: W, events: &[DetectionEvent]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENT_HEADER)?;
    for e in events {
        w.write_record([e.channel.code(), &e.timestamp.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `trigger_ns,bin,outcome,timestamp_ns` with outcome `0`, `1` or `empty`
/// (and an empty timestamp for empty bins).
pub fn write_bin_outcomes<W: Write>(out: W, frames: &[TriggerFrame]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OUTCOME_HEADER)?;
    for f in frames {
        for b in &f.bins {
            let ts = b.selected_timestamp.map(|t| t.to_string()).unwrap_or_default();
            w.write_record([&f.trigger_timestamp.to_string(), &b.bin.to_string(), b.outcome.label(), &ts])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let events = vec![
            DetectionEvent::new(Channel::Trigger, 0),
            DetectionEvent::new(Channel::Idler, 12),
            DetectionEvent::new(Channel::SignalH, 13),
            DetectionEvent::new(Channel::SignalV, 13),
        ];
        let mut buf = Vec::new();
        write_events(&mut buf, &events).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "channel,timestamp_ns\nTRIG,0\nIDLER,12\nH,13\nV,13\n"
        );
        assert_eq!(read_events(buf.as_slice()).unwrap(), events);
    }

    #[test]
    fn unsorted_line_is_reported() {
        let err = read_events("channel,timestamp_ns\nTRIG,0\nH,50\nV,40\nH,60\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PipelineError::Unsorted { line: 4, timestamp: 40 }), "{err:?}");
        assert!(err.to_string().starts_with("line 4"));
    }

    #[test]
    fn bad_channel_and_timestamp() {
        let err = read_events("channel,timestamp_ns\nTRIG,0\nX,5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PipelineError::UnknownChannel { line: 3, .. }));
        let err = read_events("channel,timestamp_ns\nTRIG,-4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PipelineError::Parse { line: 2, .. }));
        let err = read_events("chan,ts\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PipelineError::Parse { line: 1, .. }));
        let err = read_events("channel,timestamp_ns\nTRIG\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PipelineError::Parse { line: 2, .. }), "{err:?}");
    }
}
