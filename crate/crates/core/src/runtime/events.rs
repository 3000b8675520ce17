use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::dsp::PhasorSet;
use crate::protection::{FunctionId, LoopId, SuiteOutput};
use crate::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transition {
    PickupRise,
    PickupFall,
    TripRise,
    TripFall,
}

/// RMS magnitudes (A or V) in channel order plus the tracked frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Magnitudes {
    pub rms: [f64; 8],
    pub frequency_hz: f64,
}

impl Magnitudes {
    pub fn of(p: &PhasorSet) -> Self {
        Self {
            rms: Channel::ALL.map(|c| p.magnitude(c)),
            frequency_hz: p.frequency_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtectionEvent {
    /// Relay clock, nanoseconds since start.
    pub timestamp_ns: u64,
    pub sample_index: u64,
    pub function: FunctionId,
    pub transition: Transition,
    pub loop_id: Option<LoopId>,
    pub magnitudes: Magnitudes,
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RelayEvent {
    Protection(ProtectionEvent),
    /// The sample counter did not follow on from the previous frame.
    SampleGap {
        timestamp_ns: u64,
        sample_index: u64,
        expected_smp_cnt: u16,
        received_smp_cnt: u16,
    },
    DspFault {
        timestamp_ns: u64,
        sample_index: u64,
        fault: String,
    },
    SettingsApplied {
        timestamp_ns: u64,
        sample_index: u64,
    },
}

impl RelayEvent {
    pub fn timestamp_ns(&self) -> u64 {
        match self {
            RelayEvent::Protection(e) => e.timestamp_ns,
            RelayEvent::SampleGap { timestamp_ns, .. }
            | RelayEvent::DspFault { timestamp_ns, .. }
            | RelayEvent::SettingsApplied { timestamp_ns, .. } => *timestamp_ns,
        }
    }
}

/// Appends the transitions between `prev` and `next` to `out`. Within a
/// function a pickup rise always precedes a trip rise on the same step and
/// a trip fall precedes the pickup fall.
pub fn diff_outputs(
    prev: &SuiteOutput,
    next: &SuiteOutput,
    timestamp_ns: u64,
    sample_index: u64,
    phasors: &PhasorSet,
    out: &mut Vec<RelayEvent>,
) {
    for f in FunctionId::ALL {
        let (a, b) = (prev.get(f), next.get(f));
        let mut transitions = [None; 2];
        if !a.pickup && b.pickup {
            transitions[0] = Some(Transition::PickupRise);
        }
        if !a.trip && b.trip {
            transitions[1] = Some(Transition::TripRise);
        }
        if a.trip && !b.trip {
            transitions[0] = Some(Transition::TripFall);
        }
        if a.pickup && !b.pickup {
            transitions[1] = Some(Transition::PickupFall);
        }
        for t in transitions.into_iter().flatten() {
            out.push(RelayEvent::Protection(ProtectionEvent {
                timestamp_ns,
                sample_index,
                function: f,
                transition: t,
                loop_id: b.loop_id.or(a.loop_id),
                magnitudes: Magnitudes::of(phasors),
            }));
        }
    }
}

/// Line-delimited JSON event log.
pub struct EventLog<W: Write> {
    out: W,
}

impl<W: Write> EventLog<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn append(&mut self, event: &RelayEvent) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, event)?;
        self.out.write_all(b"\n")
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Checks the log invariants: non-decreasing timestamps and every trip
/// rise preceded by an unmatched pickup rise of the same function.
pub fn check_causality(events: &[RelayEvent]) -> Result<(), String> {
    let mut picked = [false; 6];
    let mut last_ts = 0;
    for (i, e) in events.iter().enumerate() {
        if e.timestamp_ns() < last_ts {
            return Err(format!("event {i}: timestamp went backwards"));
        }
        last_ts = e.timestamp_ns();
        if let RelayEvent::Protection(p) = e {
            let k = FunctionId::ALL.iter().position(|f| *f == p.function).unwrap();
            match p.transition {
                Transition::PickupRise => picked[k] = true,
                Transition::PickupFall => picked[k] = false,
                Transition::TripRise if !picked[k] => {
                    return Err(format!("event {i}: {} trip without pickup", p.function));
                }
                _ => {}
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simultaneous_rise_orders_pickup_first() {
        let prev = SuiteOutput::default();
        let mut next = SuiteOutput::default();
        next.pioc.pickup = true;
        next.pioc.trip = true;
        let mut out = Vec::new();
        diff_outputs(&prev, &next, 5, 1, &PhasorSet::default(), &mut out);
        let kinds: Vec<_> = out
            .iter()
            .map(|e| match e {
                RelayEvent::Protection(p) => p.transition,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(kinds, [Transition::PickupRise, Transition::TripRise]);
        check_causality(&out).unwrap();
        let mut back = Vec::new();
        diff_outputs(&next, &prev, 6, 2, &PhasorSet::default(), &mut back);
        out.extend(back);
        check_causality(&out).unwrap();
    }

    #[test]
    fn log_lines_parse_back() {
        let e = RelayEvent::SampleGap {
            timestamp_ns: 1,
            sample_index: 2,
            expected_smp_cnt: 101,
            received_smp_cnt: 250,
        };
        let mut log = EventLog::new(Vec::new());
        log.append(&e).unwrap();
        let text = String::from_utf8(log.into_inner()).unwrap();
        assert!(text.ends_with('\n'));
        assert!(text.contains("\"kind\":\"sample-gap\""));
        let back: RelayEvent = serde_json::from_str(text.trim()).unwrap();
        assert_eq!(back, e);
    }
}
